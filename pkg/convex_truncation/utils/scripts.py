"""Helper functions to run experiment commands from a config dictionary."""

from dataclasses import asdict, dataclass
import os
import time
from typing import Any, Callable, Dict, List, Optional, Union
import warnings

from hydra.utils import to_absolute_path
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException
from typeguard import typechecked

import convex_truncation
from convex_truncation.bodies.bodies import (
    ConvexBody,
    Hyperplane,
    axis,
    ball_for_volume,
    halfspace_for_volume,
    slab_for_volume,
)
from convex_truncation.bodies.spec import TruncationSpec, load_spec
from convex_truncation.errors import ConfigParse
from convex_truncation.gauss.batch import SampleBatch
from convex_truncation.gauss.rng import RngStream, fresh_seed
from convex_truncation.influence import log_mills_ratio, mills_ratio, truncated_moments
from convex_truncation.lb.constructions import grid_birthday_demo
from convex_truncation.lb.divergences import hellinger_sq_gaussians
from convex_truncation.lb.mixture import (
    MixtureLbParams,
    lambda_mass_quadrature,
    mixture_lb_density_check,
    mixture_lb_weights,
)
from convex_truncation.lb.power import empirical_power_at_budget
from convex_truncation.lb.wishart import estimate_tv_wishart, logdet_clt_check
from convex_truncation.samplers.factory import SamplerPlan, sample_truncated
from convex_truncation.testers.calibration import calibrate_threshold, required_samples
from convex_truncation.testers.distinguishers import TestConfig, run_distinguisher
from convex_truncation.utils.io import (
    dump_json,
    frame_to_csv_text,
    return_absolute_path,
    rows_to_frame,
    validate_payload,
    write_text,
)

COMMANDS = (
    "sample",
    "test",
    "calibrate",
    "power",
    "sweep",
    "moments",
    "lb_wishart_tv",
    "lb_clt",
    "lb_mixture",
    "lb_grid",
    "lb_power",
)

# keys of the `constants` config group handed to TestConfig
TEST_CONSTANTS = ("c_sym", "C_sample", "L_threshold", "N_threshold_c", "delta")

# body families a sweep can build at each grid point
SWEEP_BODIES = ("slab", "ball", "halfspace", "hyperplane")


@dataclass
class RunReport:
    command: str
    config: Dict[str, Any]
    results: Union[Dict[str, Any], List[Dict[str, Any]]]
    wall_time: float
    version: str
    seed: int
    substream_base: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def is_table(self) -> bool:
        return isinstance(self.results, list)

    def csv_header(self) -> str:
        """Comment line heading table output; seed and stream reproduce the rows."""
        return "# seed=%i, stream=%i, command=%s, version=%s" % (
            self.seed, self.substream_base, self.command, self.version
        )


# ------------------------------------------------------------------------------------------
# config access
# ------------------------------------------------------------------------------------------


def get_field(cfg: DictConfig, path: str, required: bool = True) -> Any:
    """cfg value at a dotted path; raises ConfigParse naming the path when it is missing."""
    try:
        value = OmegaConf.select(cfg, path, throw_on_missing=True)
    except OmegaConfBaseException as e:
        raise ConfigParse("config field '%s' could not be read: %s" % (path, e))
    if value is None and required:
        raise ConfigParse("config field '%s' is required" % path)
    if isinstance(value, DictConfig) or OmegaConf.is_list(value):
        value = OmegaConf.to_container(value, resolve=True)
    return value


def _as_int(cfg: DictConfig, path: str, required: bool = True) -> Optional[int]:
    value = get_field(cfg, path, required)
    if value is None:
        return None
    try:
        if float(value) != int(value):
            raise ValueError
        return int(value)
    except (TypeError, ValueError):
        raise ConfigParse("config field '%s' must be an integer, got %r" % (path, value))


def _as_float(cfg: DictConfig, path: str, required: bool = True) -> Optional[float]:
    value = get_field(cfg, path, required)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigParse("config field '%s' must be a number, got %r" % (path, value))


def _as_grid(cfg: DictConfig, path: str) -> List[float]:
    grid = get_field(cfg, path)
    if isinstance(grid, str):
        grid = [g for g in grid.split(",") if g.strip()]
    if not isinstance(grid, (list, tuple)) or len(grid) == 0:
        raise ConfigParse("config field '%s' must be a non-empty list, got %r" % (path, grid))
    try:
        return [float(g) for g in grid]
    except (TypeError, ValueError):
        raise ConfigParse("config field '%s' must hold numbers, got %r" % (path, grid))


@typechecked
def get_root_stream(cfg: DictConfig) -> RngStream:
    """Stream (seed, substream) of the run; a missing seed is drawn and written back to cfg."""
    seed = get_field(cfg, "seed", required=False)
    if seed is None:
        seed = fresh_seed()
        warnings.warn("no seed given; using auto-generated seed %i" % seed)
        cfg.seed = seed
    substream = _as_int(cfg, "substream", required=False) or 0
    return RngStream(int(seed), substream)


def get_test_constants(cfg: DictConfig) -> Dict[str, float]:
    return {key: _as_float(cfg, "constants.%s" % key) for key in TEST_CONSTANTS}


def get_spec(cfg: DictConfig, path: str) -> TruncationSpec:
    spec_path = get_field(cfg, path)
    return load_spec(return_absolute_path(str(spec_path)))


def get_sampler_plan(
    cfg: DictConfig, spec: TruncationSpec, strategies: Optional[List[str]] = None
) -> SamplerPlan:
    return SamplerPlan(
        spec=spec, strategies=strategies, max_attempts=_as_int(cfg, "constants.max_attempts")
    )


def get_sweep_body(family: str, n: int, eps: float) -> ConvexBody:
    """Body of the family with Gaussian volume 1 - eps (a hyperplane has volume 0)."""
    if family == "slab":
        return slab_for_volume(axis(n), 1.0 - eps)
    elif family == "ball":
        return ball_for_volume(n, 1.0 - eps)
    elif family == "halfspace":
        return halfspace_for_volume(axis(n), 1.0 - eps)
    elif family == "hyperplane":
        return Hyperplane(axis(n))
    raise ConfigParse("unknown sweep body '%s'; choose from %s" % (family, list(SWEEP_BODIES)))


def load_batch(path: str) -> SampleBatch:
    """Sample file written by the `sample` command; `.bin` files use the binary layout."""
    path = return_absolute_path(path)
    if path.endswith(".bin"):
        return SampleBatch.from_binary(path)
    return SampleBatch.from_csv(path)


# ------------------------------------------------------------------------------------------
# commands
# ------------------------------------------------------------------------------------------


def run_sample(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    spec = get_spec(cfg, "sample.spec")
    T = _as_int(cfg, "sample.T")
    plan = get_sampler_plan(cfg, spec, get_field(cfg, "sample.strategies", required=False))
    batch = sample_truncated(spec, T, rng, plan=plan, workers=_as_int(cfg, "workers"))
    out_file = to_absolute_path(str(get_field(cfg, "sample.file")))
    os.makedirs(os.path.dirname(out_file), exist_ok=True)
    file_format = get_field(cfg, "sample.file_format")
    if file_format == "binary":
        batch.to_binary(out_file)
    elif file_format == "csv":
        batch.to_csv(out_file)
    else:
        raise ConfigParse("sample.file_format must be 'csv' or 'binary', got '%s'" % file_format)
    return {
        "file": out_file,
        "n": batch.dim,
        "T": batch.count,
        "strategies": list(plan.strategies),
        "mean_sq_norm": float(batch.sq_norms.mean()),
    }


def run_test(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    algorithm = get_field(cfg, "test.alg")
    eps = _as_float(cfg, "test.eps")
    samples = get_field(cfg, "test.samples", required=False)
    if samples is not None:
        batch = load_batch(str(samples))
        n = batch.dim
    else:
        spec = get_spec(cfg, "test.spec")
        n = spec.n
    n_cfg = _as_int(cfg, "test.n", required=False)
    if n_cfg is not None and n_cfg != n:
        raise ConfigParse("test.n=%i does not match the data dimension %i" % (n_cfg, n))
    config = TestConfig(n=n, eps=eps, T=_as_int(cfg, "test.T", required=False), **get_test_constants(cfg))
    if samples is None:
        batch = sample_truncated(
            spec, config.resolved_T(algorithm), rng,
            plan=get_sampler_plan(cfg, spec), workers=_as_int(cfg, "workers"),
        )
    report = run_distinguisher(algorithm, batch, config).to_dict()
    validate_payload(report, "test_report")
    return report


def run_calibrate(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    algorithm = get_field(cfg, "calibrate.alg")
    n = _as_int(cfg, "calibrate.n")
    eps = _as_float(cfg, "calibrate.eps")
    T = _as_int(cfg, "calibrate.T", required=False)
    if T is None:
        T = required_samples(algorithm, n, eps, _as_float(cfg, "constants.C_sample"))
    result = calibrate_threshold(
        algorithm, n, eps, T,
        alpha0=_as_float(cfg, "calibrate.alpha0"),
        trials=_as_int(cfg, "calibrate.trials"),
        rng=rng,
        workers=_as_int(cfg, "workers"),
        delta=_as_float(cfg, "constants.delta"),
    )
    return result.to_dict()


def _power_row(parameter: float, estimate) -> Dict[str, Any]:
    row = {"parameter": parameter, "estimate": estimate.rate, "stderr": estimate.stderr}
    row.update({"T": estimate.T, "eps": estimate.eps, "algorithm": estimate.algorithm})
    return row


def _power_curve(cfg: DictConfig, rng: RngStream, group: str) -> List[Dict[str, Any]]:
    spec = get_spec(cfg, "%s.spec" % group)
    algorithm = get_field(cfg, "%s.alg" % group)
    trials = _as_int(cfg, "%s.trials" % group)
    eps = _as_float(cfg, "%s.eps" % group, required=False)
    plan = get_sampler_plan(cfg, spec)
    rows = []
    for k, T in enumerate(_as_grid(cfg, "%s.T_grid" % group)):
        estimate = empirical_power_at_budget(
            spec, algorithm, int(T), trials, rng.spawn(k),
            eps=eps, workers=_as_int(cfg, "workers"), plan=plan, **get_test_constants(cfg),
        )
        rows.append(_power_row(int(T), estimate))
    return rows


def run_power(cfg: DictConfig, rng: RngStream) -> List[Dict[str, Any]]:
    return _power_curve(cfg, rng, "power")


def run_sweep(cfg: DictConfig, rng: RngStream) -> List[Dict[str, Any]]:
    """Power of one algorithm over a grid of eps, n or T; grid point k uses rng.spawn(k)."""
    parameter = get_field(cfg, "sweep.parameter")
    if parameter not in ("eps", "n", "T"):
        raise ConfigParse("sweep.parameter must be one of eps, n, T, got '%s'" % parameter)
    grid = _as_grid(cfg, "sweep.grid")
    algorithm = get_field(cfg, "sweep.alg")
    family = get_field(cfg, "sweep.body")
    trials = _as_int(cfg, "sweep.trials")
    rows = []
    for k, value in enumerate(grid):
        point = {
            "eps": _as_float(cfg, "sweep.eps"),
            "n": _as_int(cfg, "sweep.n"),
            "T": _as_int(cfg, "sweep.T"),
        }
        point[parameter] = value
        n, T = int(point["n"]), int(point["T"])
        body = get_sweep_body(family, n, float(point["eps"]))
        estimate = empirical_power_at_budget(
            body, algorithm, T, trials, rng.spawn(k),
            workers=_as_int(cfg, "workers"), **get_test_constants(cfg),
        )
        rows.append(_power_row(value, estimate))
    return rows


def run_moments(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    rows = []
    for b in _as_grid(cfg, "moments.b"):
        moments = truncated_moments(b)
        row = asdict(moments)
        row.update({
            "variance": moments.variance,
            "mills_ratio": mills_ratio(b),
            "log_mills_ratio": log_mills_ratio(b),
        })
        rows.append(row)
    return {"moments": rows}


def run_lb_wishart_tv(cfg: DictConfig, rng: RngStream) -> Union[Dict[str, Any], List[Dict[str, Any]]]:
    n = _as_int(cfg, "lb.wishart_tv.n")
    draws = _as_int(cfg, "lb.wishart_tv.draws")
    p_grid = get_field(cfg, "lb.wishart_tv.p_grid", required=False)
    if p_grid is None:
        p = _as_int(cfg, "lb.wishart_tv.p")
        estimate, stderr = estimate_tv_wishart(p, n, draws, rng)
        return {"p": p, "n": n, "draws": draws, "estimate": estimate, "stderr": stderr}
    rows = []
    for k, p in enumerate(_as_grid(cfg, "lb.wishart_tv.p_grid")):
        estimate, stderr = estimate_tv_wishart(int(p), n, draws, rng.spawn(k))
        rows.append({"parameter": int(p), "estimate": estimate, "stderr": stderr})
    return rows


def run_lb_clt(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    p = _as_int(cfg, "lb.clt.p")
    n = _as_int(cfg, "lb.clt.n")
    result = logdet_clt_check(p, n, _as_int(cfg, "lb.clt.trials"), rng)
    return {"p": p, "n": n, **result._asdict()}


def run_lb_mixture(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    params = MixtureLbParams(
        n=_as_int(cfg, "lb.mixture.n"),
        delta=_as_float(cfg, "lb.mixture.delta", required=False),
        C=_as_float(cfg, "lb.mixture.C"),
        grid_points=_as_int(cfg, "lb.mixture.grid_points"),
    )
    weights = mixture_lb_weights(params)
    check = mixture_lb_density_check(weights)
    return {
        "params": weights.params.to_dict(),
        "a_star": weights.a_star,
        "mass_above_a_star": float(weights.mass_above(weights.a_star)),
        "mass_above_a_star_quadrature": lambda_mass_quadrature(weights, weights.a_star),
        "density_check": {k: v for k, v in check.to_dict().items() if k != "grid"},
        "tail_bound": check.tail_bound,
        "hellinger_sq": hellinger_sq_gaussians(params.n, params.delta),
    }


def run_lb_grid(cfg: DictConfig, rng: RngStream) -> Dict[str, Any]:
    result = grid_birthday_demo(
        n=_as_int(cfg, "lb.grid.n"),
        M=_as_int(cfg, "lb.grid.M"),
        eps=_as_float(cfg, "lb.grid.eps"),
        N=_as_int(cfg, "lb.grid.N"),
        trials=_as_int(cfg, "lb.grid.trials"),
        rng=rng,
        workers=_as_int(cfg, "workers"),
    )
    return result.to_dict()


def run_lb_power(cfg: DictConfig, rng: RngStream) -> Union[Dict[str, Any], List[Dict[str, Any]]]:
    if get_field(cfg, "lb.power.T_grid", required=False) is not None:
        return _power_curve(cfg, rng, "lb.power")
    spec = get_spec(cfg, "lb.power.spec")
    estimate = empirical_power_at_budget(
        spec,
        get_field(cfg, "lb.power.alg"),
        _as_int(cfg, "lb.power.T"),
        _as_int(cfg, "lb.power.trials"),
        rng,
        eps=_as_float(cfg, "lb.power.eps", required=False),
        workers=_as_int(cfg, "workers"),
        plan=get_sampler_plan(cfg, spec),
        **get_test_constants(cfg),
    )
    return estimate.to_dict()


def get_command_runners() -> Dict[str, Callable[[DictConfig, RngStream], Any]]:
    runners = {
        "sample": run_sample,
        "test": run_test,
        "calibrate": run_calibrate,
        "power": run_power,
        "sweep": run_sweep,
        "moments": run_moments,
        "lb_wishart_tv": run_lb_wishart_tv,
        "lb_clt": run_lb_clt,
        "lb_mixture": run_lb_mixture,
        "lb_grid": run_lb_grid,
        "lb_power": run_lb_power,
    }
    return runners


# ------------------------------------------------------------------------------------------
# orchestration
# ------------------------------------------------------------------------------------------


def run(cfg: DictConfig) -> RunReport:
    """Dispatch cfg.command and wrap its results in a RunReport.

    The report's `config` echoes cfg with the seed filled in, so re-running it reproduces
    `results` exactly.

    """
    command = get_field(cfg, "command")
    runners = get_command_runners()
    if command not in runners:
        raise ConfigParse("unknown command '%s'; choose from %s" % (command, list(COMMANDS)))
    rng = get_root_stream(cfg)
    start = time.perf_counter()
    results = runners[command](cfg, rng)
    wall_time = time.perf_counter() - start
    report = RunReport(
        command=command,
        config=OmegaConf.to_container(cfg, resolve=True),
        results=results,
        wall_time=wall_time,
        version=convex_truncation.__version__,
        seed=rng.master_seed,
        substream_base=rng.stream_index,
    )
    if not report.is_table:
        validate_payload(report.to_dict(), "run_report")
    return report


def sweep(cfg: DictConfig) -> RunReport:
    """run() with command forced to `sweep`."""
    cfg = OmegaConf.merge(cfg, {"command": "sweep"})
    return run(cfg)


def format_report(report: RunReport, fmt: str = "json") -> str:
    """Tables (sweeps, power curves) as csv headed by a seed comment line, the rest as json."""
    if report.is_table:
        return report.csv_header() + "\n" + frame_to_csv_text(rows_to_frame(report.results))
    if fmt != "json":
        raise ConfigParse("format '%s' is only available for sweep-like commands" % fmt)
    return dump_json(report.to_dict())


def emit_report(report: RunReport, cfg: DictConfig) -> None:
    out = get_field(cfg, "out", required=False)
    text = format_report(report, get_field(cfg, "format"))
    write_text(text, None if out is None else to_absolute_path(str(out)))


def error_context(cfg: DictConfig) -> str:
    """`command=..., spec=...` prefix for error messages."""
    command = OmegaConf.select(cfg, "command", default=None)
    parts = ["command=%s" % command]
    group = str(command).replace("lb_", "lb.")
    for key in ("spec", "samples"):
        value = OmegaConf.select(cfg, "%s.%s" % (group, key), default=None)
        if value is not None:
            parts.append("%s=%s" % (key, value))
    return ", ".join(parts)

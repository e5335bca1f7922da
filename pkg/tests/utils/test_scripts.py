"""Test the config-driven command runners behind the experiment script."""

import io
import json
import math
import os

from omegaconf import OmegaConf
import pandas as pd
import pytest


def _configure(cfg, **fields):
    for path, value in fields.items():
        OmegaConf.update(cfg, path.replace("__", "."), value, force_add=True)
    return cfg


def test_run_test_from_spec(cfg, spec_dir):

    from convex_truncation.utils.scripts import run

    _configure(
        cfg, command="test", test__spec=os.path.join(spec_dir, "ball_half.json"), test__eps=0.5,
    )
    report = run(cfg)
    assert report.command == "test"
    assert not report.is_table
    assert report.seed == cfg.seed
    results = report.results
    assert results["verdict"] == "truncated"
    assert results["T"] == 3200
    assert results["n"] == 100
    assert not results["diagnostics"]["underpowered"]

    # same config, same results, regardless of workers
    cfg.workers = 3
    assert run(cfg).results == results


def test_run_test_dimension_check(cfg, spec_dir):

    from convex_truncation.errors import ConfigParse
    from convex_truncation.utils.scripts import run

    _configure(cfg, command="test", test__spec=os.path.join(spec_dir, "ball_half.json"), test__n=50)
    with pytest.raises(ConfigParse):
        run(cfg)


@pytest.mark.parametrize("name,file_format", [("s.csv", "csv"), ("s.bin", "binary")])
def test_sample_then_test_file(cfg, spec_dir, tmpdir, name, file_format):

    from convex_truncation.utils.scripts import run

    path = os.path.join(tmpdir, name)
    _configure(
        cfg, command="sample", sample__spec=os.path.join(spec_dir, "slab_half.json"),
        sample__T=500, sample__file=path, sample__file_format=file_format,
    )
    report = run(cfg)
    assert os.path.isfile(path)
    assert report.results["T"] == 500
    assert report.results["strategies"] == ["exact_axis"]

    _configure(cfg, command="test", test__samples=path, test__alg="symm")
    with pytest.warns(UserWarning, match="underpowered"):
        tested = run(cfg)
    assert tested.results["T"] == 500
    assert tested.results["diagnostics"]["underpowered"]


def test_sample_rejects_unknown_format(cfg, spec_dir, tmpdir):

    from convex_truncation.errors import ConfigParse
    from convex_truncation.utils.scripts import run

    _configure(
        cfg, command="sample", sample__spec=os.path.join(spec_dir, "slab_half.json"),
        sample__T=10, sample__file=os.path.join(tmpdir, "s.h5"), sample__file_format="hdf5",
    )
    with pytest.raises(ConfigParse):
        run(cfg)


def test_run_calibrate(cfg):

    from convex_truncation.utils.scripts import run

    _configure(cfg, command="calibrate", calibrate__n=10, calibrate__T=100, calibrate__trials=500)
    results = run(cfg).results
    assert results["algorithm"] == "symm"
    assert results["trials"] == 500
    assert results["T"] == 100


def test_run_moments(cfg):

    from convex_truncation.utils.scripts import run

    cfg.command = "moments"
    rows = run(cfg).results["moments"]
    assert [row["b"] for row in rows] == [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
    at_zero = rows[3]
    assert abs(at_zero["M1"] - math.sqrt(2.0 / math.pi)) < 1e-12
    assert abs(at_zero["variance"] - (1.0 - 2.0 / math.pi)) < 1e-12
    assert abs(math.exp(at_zero["log_mills_ratio"]) - at_zero["mills_ratio"]) < 1e-14


def test_run_power_is_csv(cfg, spec_dir):

    from convex_truncation.utils.scripts import format_report, run

    _configure(
        cfg, command="power", power__spec=os.path.join(spec_dir, "halfspace0.json"),
        power__T_grid=[10, 40], power__trials=100,
    )
    report = run(cfg)
    assert report.is_table
    text = format_report(report)
    assert text.splitlines()[0] == "# seed=%i, stream=0, command=power, version=%s" % (
        cfg.seed, report.version
    )
    df = pd.read_csv(io.StringIO(text), comment="#")
    assert list(df.columns[:3]) == ["parameter", "estimate", "stderr"]
    assert list(df["parameter"]) == [10, 40]
    assert df["estimate"].between(0.0, 1.0).all()


def _parse_csv_header(line):
    assert line.startswith("# ")
    return dict(item.strip().split("=", 1) for item in line[2:].split(","))


def test_power_csv_header_reproduces_table(cfg, spec_dir):

    import convex_truncation
    from convex_truncation.utils.scripts import format_report, run

    _configure(
        cfg, command="power", power__spec=os.path.join(spec_dir, "halfspace0.json"),
        power__T_grid=[10, 40], power__trials=50, seed=None, substream=3, workers=2,
    )
    rerun_cfg = OmegaConf.create(OmegaConf.to_container(cfg))
    with pytest.warns(UserWarning, match="auto-generated seed"):
        first = format_report(run(cfg))

    fields = _parse_csv_header(first.splitlines()[0])
    assert fields["stream"] == "3"
    assert fields["command"] == "power"
    assert fields["version"] == convex_truncation.__version__

    # the header alone is enough to rebuild the table
    _configure(rerun_cfg, seed=int(fields["seed"]), substream=int(fields["stream"]), workers=1)
    assert format_report(run(rerun_cfg)) == first


def test_run_sweep(cfg):

    from convex_truncation.utils.scripts import run, sweep

    _configure(
        cfg, command="test", sweep__grid=[0.2, 0.8], sweep__body="ball", sweep__n=20,
        sweep__T=200, sweep__trials=100,
    )
    report = sweep(cfg)
    assert report.command == "sweep"
    assert [row["parameter"] for row in report.results] == [0.2, 0.8]
    # the grid point sets the body volume; the thresholds follow the budget
    assert all(row["eps"] == math.sqrt(8.0 * 20 / 200) for row in report.results)

    _configure(cfg, command="sweep", workers=4)
    assert run(cfg).results == report.results


def test_run_sweep_over_n(cfg):

    from convex_truncation.utils.scripts import sweep

    _configure(
        cfg, sweep__parameter="n", sweep__grid=[10, 20], sweep__body="slab",
        sweep__T=100, sweep__trials=100,
    )
    rows = sweep(cfg).results
    assert [row["parameter"] for row in rows] == [10.0, 20.0]
    assert rows[0]["eps"] < rows[1]["eps"]


@pytest.mark.parametrize(
    "fields",
    [
        {"sweep__parameter": "delta"},
        {"sweep__body": "simplex"},
        {"sweep__grid": []},
        {"sweep__grid": ["a", "b"]},
    ],
)
def test_run_sweep_rejects_config(cfg, fields):

    from convex_truncation.errors import ConfigParse
    from convex_truncation.utils.scripts import sweep

    _configure(cfg, sweep__trials=100, sweep__T=50, sweep__n=5, **fields)
    with pytest.raises(ConfigParse):
        sweep(cfg)


def test_run_lb_commands(cfg, spec_dir):

    from convex_truncation.utils.scripts import run

    _configure(cfg, command="lb_wishart_tv", lb__wishart_tv__draws=1000)
    results = run(cfg).results
    assert results["p"] == 2 and 0.0 <= results["estimate"] <= 1.0

    _configure(cfg, lb__wishart_tv__n=100, lb__wishart_tv__p_grid=[2, 4])
    table = run(cfg)
    assert table.is_table
    assert [row["parameter"] for row in table.results] == [2, 4]

    _configure(cfg, command="lb_clt", lb__clt__p=4, lb__clt__n=400, lb__clt__trials=200)
    results = run(cfg).results
    assert set(results) == {"p", "n", "mean", "std", "reference_std"}

    _configure(cfg, command="lb_mixture")
    results = run(cfg).results
    assert abs(results["mass_above_a_star"] - 1.0) < 1e-6
    assert results["density_check"]["max_rel_diff"] <= 1e-8
    assert 0.0 < results["hellinger_sq"] < 1.0

    _configure(cfg, command="lb_grid", lb__grid__M=10000, lb__grid__N=10, lb__grid__trials=100)
    results = run(cfg).results
    assert abs(results["birthday_bound"] - (1.0 - 100 / 5000.0)) < 1e-12

    _configure(
        cfg, command="lb_power", lb__power__spec=os.path.join(spec_dir, "slab_half.json"),
        lb__power__T=200, lb__power__trials=100,
    )
    results = run(cfg).results
    assert results["T"] == 200 and results["trials"] == 100

    _configure(cfg, lb__power__T_grid=[50, 100])
    assert [row["parameter"] for row in run(cfg).results] == [50, 100]


def test_run_config_errors(cfg, spec_dir):

    from convex_truncation.errors import ConfigParse
    from convex_truncation.utils.scripts import run

    cfg.command = "train"
    with pytest.raises(ConfigParse, match="unknown command"):
        run(cfg)

    # test.spec is null in the default config
    cfg.command = "test"
    with pytest.raises(ConfigParse, match="test.spec"):
        run(cfg)

    _configure(cfg, test__spec=os.path.join(spec_dir, "ball_half.json"), test__T=12.5)
    with pytest.raises(ConfigParse, match="integer"):
        run(cfg)


def test_missing_seed_is_recorded(cfg):

    from convex_truncation.utils.scripts import run

    cfg.command = "moments"
    cfg.seed = None
    with pytest.warns(UserWarning, match="auto-generated seed"):
        report = run(cfg)
    assert report.seed == cfg.seed
    assert report.config["seed"] == cfg.seed


def test_emit_report(cfg, tmpdir):

    from convex_truncation.errors import ConfigParse
    from convex_truncation.utils.scripts import emit_report, format_report, run

    out = os.path.join(tmpdir, "moments.json")
    _configure(cfg, command="moments", out=out)
    report = run(cfg)
    emit_report(report, cfg)
    with open(out, "r") as f:
        payload = json.load(f)
    assert payload["command"] == "moments"
    assert payload["seed"] == cfg.seed
    assert len(payload["results"]["moments"]) == 7

    with pytest.raises(ConfigParse):
        format_report(report, "csv")


def test_error_context(cfg):

    from convex_truncation.utils.scripts import error_context

    _configure(cfg, command="lb_power", lb__power__spec="specs/x.json")
    assert error_context(cfg) == "command=lb_power, spec=specs/x.json"
    cfg.command = "moments"
    assert error_context(cfg) == "command=moments"


def test_halfspace_power_config(spec_dir):

    from convex_truncation.utils.scripts import run

    config_file = os.path.join(os.path.dirname(spec_dir), "configs", "config_halfspace-power.yaml")
    cfg = OmegaConf.load(config_file)
    cfg.power.spec = os.path.join(spec_dir, "halfspace0.json")
    rows = run(cfg).results
    rates = [row["estimate"] for row in rows]
    assert [row["parameter"] for row in rows] == [10, 40, 160, 640]
    # the power curve rises with the budget
    for row, prev in zip(rows[1:], rows[:-1]):
        assert row["estimate"] >= prev["estimate"] - 2 * prev["stderr"]
    assert rates[0] <= 0.1
    assert rates[-1] >= 0.9


def test_pretty_print_cfg(cfg, capsys):

    from convex_truncation.utils import pretty_print_cfg, pretty_print_str

    pretty_print_cfg(cfg)
    printed = capsys.readouterr().out
    assert "command: test" in printed
    # one block per config group
    for group in ["constants", "test", "lb"]:
        assert "%s parameters" % group in printed

    pretty_print_str("done")
    assert capsys.readouterr().out == "----\ndone\n----\n"

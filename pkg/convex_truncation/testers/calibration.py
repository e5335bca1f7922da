"""Sample-size formulas and Monte Carlo calibration of threshold constants."""

from dataclasses import asdict, dataclass
import math
from typing import Any, Dict, Optional

import numpy as np
from typeguard import typechecked

from convex_truncation.gauss import TOLERANCES
from convex_truncation.gauss.primitives import gaussian_batch
from convex_truncation.gauss.rng import RngStream
from convex_truncation.testers.constants import DEFAULT_CONSTANTS
from convex_truncation.testers.statistics import statistic_L_normsq, statistic_M, statistic_N
from convex_truncation.utils.parallel import map_trials

ALGORITHMS = ("symm", "convex", "ltf")


def _check_algorithm(algorithm: str) -> None:
    if algorithm not in ALGORITHMS:
        raise NotImplementedError(
            "unknown algorithm '%s'; choose from %s" % (algorithm, list(ALGORITHMS))
        )


def _ltf_size(n: int, eps: float, C: float) -> float:
    return C * math.sqrt(n) / eps ** 2 + C * math.log(1.0 / eps) ** 2 / eps ** 4


def required_samples(algorithm: str, n: int, eps: float, C: float = DEFAULT_CONSTANTS.C_sample) -> int:
    """Auto-sized T: ceil(C n / ε²) for symm/convex, ceil(C √n/ε² + C log²(1/ε)/ε⁴) for ltf."""
    _check_algorithm(algorithm)
    if not eps > 0:
        raise ValueError("eps must be positive, got %s" % eps)
    if algorithm == "ltf":
        return int(math.ceil(_ltf_size(n, eps, C)))
    return int(math.ceil(C * n / eps ** 2))


def budget_epsilon(algorithm: str, n: int, T: int, C: float = DEFAULT_CONSTANTS.C_sample) -> float:
    """The distance a budget of T samples resolves: the inverse of required_samples.

    For symm/convex this is sqrt(C n / T). For ltf the size formula is inverted by
    bisection on ε in (0, 1); when even ε -> 1 needs more than T samples the √n term alone
    is inverted, sqrt(C √n / T).

    """
    _check_algorithm(algorithm)
    if T < 1:
        raise ValueError("budget T must be >= 1, got %i" % T)
    if algorithm != "ltf":
        return math.sqrt(C * n / T)
    if _ltf_size(n, 1.0 - 1e-12, C) > T:
        return math.sqrt(C * math.sqrt(n) / T)
    lo, hi = 1e-6, 1.0 - 1e-12
    if _ltf_size(n, lo, C) <= T:
        return lo
    # size is decreasing in eps; keep hi on the feasible side
    for _ in range(TOLERANCES.bisection_iters):
        mid = 0.5 * (lo + hi)
        if _ltf_size(n, mid, C) <= T:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class CalibrationResult:
    algorithm: str
    constant: float
    threshold: float
    alpha0: float
    n: int
    eps: float
    T: int
    trials: int
    L_threshold: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@typechecked
def calibrate_threshold(
    algorithm: str,
    n: int,
    eps: float,
    T: int,
    alpha0: float,
    trials: int,
    rng: RngStream,
    workers: Optional[int] = 1,
    delta: float = DEFAULT_CONSTANTS.delta,
) -> CalibrationResult:
    """Null-quantile calibration of a distinguisher's threshold constant.

    - symm: t = α₀-quantile of M under the null, constant c = 2 (n - t) / ε
    - convex: the same with α₀/2 for M, plus L_threshold = (1 - α₀/2)-quantile of |L|²,
      so the union of both branches keeps the type-I error near α₀
    - ltf: t = (1 - α₀)-quantile of N, constant c = (t - n/T) / ε²

    Args:
        algorithm: "symm", "convex" or "ltf"
        n: dimension
        eps: distance parameter the constant is expressed against
        T: samples per simulated test
        alpha0: target type-I error
        trials: number of null tests simulated, at least 500
        rng: trial i uses rng.spawn(i)
        workers: threads; never changes the result
        delta: mean-estimator failure probability (convex only)

    Returns:
        CalibrationResult whose `constant` plugs into TestConfig (c_sym or N_threshold_c)

    """
    _check_algorithm(algorithm)
    if trials < 500:
        raise ValueError("calibration needs at least 500 trials, got %i" % trials)
    if not 0.0 < alpha0 < 1.0:
        raise ValueError("alpha0 must lie in (0, 1), got %s" % alpha0)
    if not eps > 0:
        raise ValueError("eps must be positive, got %s" % eps)

    def _null_trial(i: int, stream: RngStream) -> Dict[str, float]:
        batch = gaussian_batch(n, T, stream)
        if algorithm == "symm":
            return {"M": statistic_M(batch)}
        elif algorithm == "convex":
            return {"M": statistic_M(batch), "L": statistic_L_normsq(batch, delta)}
        else:
            return {"N": statistic_N(batch)}

    stats = map_trials(_null_trial, trials, rng, workers=workers)
    L_threshold = None
    if algorithm == "ltf":
        t = float(np.quantile([s["N"] for s in stats], 1.0 - alpha0))
        constant = (t - n / T) / eps ** 2
    else:
        level = alpha0 if algorithm == "symm" else 0.5 * alpha0
        t = float(np.quantile([s["M"] for s in stats], level))
        constant = 2.0 * (n - t) / eps
        if algorithm == "convex":
            L_threshold = float(np.quantile([s["L"] for s in stats], 1.0 - level))
    return CalibrationResult(
        algorithm=algorithm,
        constant=constant,
        threshold=t,
        alpha0=alpha0,
        n=n,
        eps=eps,
        T=T,
        trials=trials,
        L_threshold=L_threshold,
    )

"""Desk-scale versions of the lower-bound constructions.

- grid_birthday_demo: a random union of a (1 - ε) fraction of M equal-mass grid cells. As
  long as N samples land in distinct cells they are distributed exactly as N samples from
  N(0, I_n), and by the birthday bound this happens with probability >= 1 - N²/((1 - ε)M).
- slab_lb_typicality_probe: how often m random slab normals violate the norm / pairwise
  inner-product window the slab coupling needs.

"""

from dataclasses import asdict, dataclass
import math
from typing import Any, Dict, Optional

import numpy as np
from typeguard import typechecked

from convex_truncation.bodies.bodies import grid_union_random
from convex_truncation.gauss.rng import RngStream
from convex_truncation.samplers.factory import sample_truncated
from convex_truncation.testers.statistics import statistic_M
from convex_truncation.utils.parallel import map_trials

COUPLING_CONSTRUCTIONS = ("halfspace", "slab")


def typicality_window(n: int, C1: float) -> float:
    """C1 sqrt(log n / n)."""
    return C1 * math.sqrt(math.log(n) / n)


def tuple_is_atypical(G: np.ndarray, C1: float, check_norms: bool = True) -> bool:
    """Typicality test for the rows g_1, ..., g_m of G (shape m x n).

    A tuple is atypical if
    (a) some |g_i| / sqrt(n) lies outside [1 - w, 1 + w] (only when check_norms), or
    (b) some pair i != j has |g_i . g_j| / n > w (|cos(g_i, g_j)| > w when check_norms
        is off),
    with w = C1 sqrt(log n / n).

    """
    m, n = G.shape
    w = typicality_window(n, C1)
    norms = np.linalg.norm(G, axis=1)
    if check_norms and np.any(np.abs(norms / math.sqrt(n) - 1.0) > w):
        return True
    if m < 2:
        return False
    if check_norms:
        inner = G @ G.T / n
    else:
        U = G / norms[:, None]
        inner = U @ U.T
    off = np.abs(inner[~np.eye(m, dtype=bool)])
    return bool(np.any(off > w))


@typechecked
def slab_lb_typicality_probe(
    n: int, m: int, trials: int, rng: RngStream, C1: float = 3.0, workers: Optional[int] = 1
) -> float:
    """Fraction of trials whose m i.i.d. N(0, I_n) vectors form an atypical tuple."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n, got m=%i, n=%i" % (m, n))
    if trials < 1:
        raise ValueError("need at least one trial, got %i" % trials)

    def _trial(i: int, stream: RngStream) -> bool:
        return tuple_is_atypical(stream.generator().standard_normal((m, n)), C1)

    flags = map_trials(_trial, trials, rng, workers=workers)
    return float(np.mean(flags))


@dataclass(frozen=True)
class GridBirthdayResult:
    distinct_frequency: float
    birthday_bound: float
    trials: int
    # statistic_M over the trials whose points were all in distinct cells
    mean_M_distinct: Optional[float]
    stderr_M_distinct: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@typechecked
def grid_birthday_demo(
    n: int,
    M: int,
    eps: float,
    N: int,
    trials: int,
    rng: RngStream,
    workers: Optional[int] = 1,
) -> GridBirthdayResult:
    """Birthday-paradox indistinguishability of random grid unions.

    Trial i draws a fresh grid union keeping floor((1 - ε) M) cells from rng.spawn(i).spawn(0)
    and N exact samples from it on rng.spawn(i).spawn(1), then checks whether all N points
    fall into distinct cells.

    Args:
        n: dimension
        M: number of equal-mass cells
        eps: removed fraction, N² <= (1 - ε) M
        N: points per trial
        trials: number of trials
        rng: master stream
        workers: threads; never changes the result

    Returns:
        GridBirthdayResult

    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1), got %s" % eps)
    if N < 1 or trials < 1:
        raise ValueError("need N >= 1 and trials >= 1, got N=%i, trials=%i" % (N, trials))
    if N * N > (1.0 - eps) * M:
        raise ValueError(
            "birthday regime needs N^2 <= (1 - eps) M, got N=%i, M=%i, eps=%s" % (N, M, eps)
        )

    def _trial(i: int, stream: RngStream) -> Dict[str, Any]:
        grid = grid_union_random(n, M, 1.0 - eps, stream.spawn(0))
        batch = sample_truncated(grid, N, stream.spawn(1))
        cells = grid.cell_index(batch.data)
        return {"distinct": np.unique(cells).size == N, "M": statistic_M(batch)}

    results = map_trials(_trial, trials, rng, workers=workers)
    distinct = [r for r in results if r["distinct"]]
    mean_M, stderr_M = None, None
    if len(distinct) > 1:
        values = np.array([r["M"] for r in distinct])
        mean_M = float(values.mean())
        stderr_M = float(values.std(ddof=1) / math.sqrt(len(values)))
    return GridBirthdayResult(
        distinct_frequency=len(distinct) / trials,
        birthday_bound=1.0 - N * N / ((1.0 - eps) * M),
        trials=trials,
        mean_M_distinct=mean_M,
        stderr_M_distinct=stderr_M,
    )

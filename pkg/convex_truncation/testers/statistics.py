"""Test statistics and the robust mean estimator."""

import math

import torch
from torchtyping import TensorType
from typeguard import typechecked

from convex_truncation.errors import TooFewSamples
from convex_truncation.gauss import TOLERANCES
from convex_truncation.gauss.batch import SampleBatch


@typechecked
def statistic_M(batch: SampleBatch) -> float:
    """(1/T) Σ |x_i|²."""
    return float(batch.sq_norms.mean())


@typechecked
def statistic_N(batch: SampleBatch) -> float:
    """|(1/T) Σ x_i|²."""
    mean = batch.data.mean(dim=0)
    return float(mean @ mean)


def geometric_median(
    points: TensorType["num_points", "dim", torch.float64],
    iters: int = TOLERANCES.weiszfeld_iters,
    tol: float = TOLERANCES.weiszfeld_tol,
) -> TensorType["dim", torch.float64]:
    """Weiszfeld iteration started from the coordinate-wise mean.

    Distances are floored at 1e-300 so an iterate landing on a data point stays finite.

    """
    if points.shape[0] == 0:
        raise TooFewSamples("geometric median of an empty point set")
    first = points[0]
    if bool((points == first).all()):
        return first.clone()
    y = points.mean(dim=0)
    for _ in range(iters):
        dist = torch.linalg.norm(points - y, dim=1).clamp_min(1e-300)
        w = 1.0 / dist
        y_new = (w[:, None] * points).sum(dim=0) / w.sum()
        step = float(torch.linalg.norm(y_new - y))
        y = y_new
        if step <= tol * max(1.0, float(torch.linalg.norm(y))):
            break
    return y


def num_blocks(delta: float) -> int:
    """k = ceil(8 log(1/δ))."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1), got %s" % delta)
    return int(math.ceil(8.0 * math.log(1.0 / delta)))


def mean_estimator(batch: SampleBatch, delta: float = 0.01) -> TensorType["dim", torch.float64]:
    """Geometric median of k block means (median-of-means).

    Rows are split in order into k = ceil(8 log(1/δ)) contiguous blocks of near-equal size.
    For distributions with trace(Σ) <= n the output is within O(sqrt(n/T) + sqrt(log(1/δ)/T))
    of the mean with probability 1 - δ.

    Args:
        batch: T x n samples, T >= 8 ceil(log(1/δ))
        delta: failure probability

    Returns:
        estimate of the mean, shape (n,)

    """
    k = num_blocks(delta)
    required = max(k, 8 * int(math.ceil(math.log(1.0 / delta))))
    if batch.count < required:
        raise TooFewSamples(
            "mean estimator with delta=%s needs T >= %i rows, got %i" % (delta, required, batch.count)
        )
    x = batch.data
    if bool((x == x[0]).all()):
        return x[0].clone()
    block_means = torch.stack([block.mean(dim=0) for block in torch.tensor_split(x, k, dim=0)])
    return geometric_median(block_means)


def statistic_L_normsq(batch: SampleBatch, delta: float = 0.01) -> float:
    L = mean_estimator(batch, delta)
    return float(L @ L)

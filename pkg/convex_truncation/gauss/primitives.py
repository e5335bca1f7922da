"""Gaussian, sphere and truncated-normal sampling primitives.

Every block sampler follows the same flow:
- split the requested rows into chunks of CHUNK_ROWS
- chunk j draws from its own substream rng.spawn(j)
- chunks are concatenated in order

so a block is a pure function of (rng, T) however the chunks are scheduled.

"""

import math
from typing import Callable, List

import numpy as np
from scipy import special
import torch
from torchtyping import TensorType
from typeguard import typechecked

from convex_truncation.errors import EmptyInterval
from convex_truncation.gauss import CHUNK_ROWS
from convex_truncation.gauss.batch import SampleBatch
from convex_truncation.gauss.rng import RngStream
from convex_truncation.gauss.special import norm_ppf


def chunk_sizes(T: int, chunk_rows: int = CHUNK_ROWS) -> List[int]:
    full, rest = divmod(T, chunk_rows)
    return [chunk_rows] * full + ([rest] if rest else [])


def chunked(
    T: int,
    rng: RngStream,
    draw: Callable[[np.random.Generator, int], np.ndarray],
) -> np.ndarray:
    """Concatenate draw(generator_j, rows_j) over the chunks of a T-row block."""
    blocks = [draw(rng.spawn(j).generator(), rows) for j, rows in enumerate(chunk_sizes(T))]
    return np.concatenate(blocks, axis=0)


@typechecked
def gaussian_batch(n: int, T: int, rng: RngStream) -> SampleBatch:
    """T i.i.d. rows of N(0, I_n).

    Args:
        n: dimension
        T: number of rows
        rng: stream owning the block

    Returns:
        SampleBatch with provenance (rng.master_seed, rng.stream_index)

    """
    if n < 1:
        raise ValueError("dimension n must be >= 1, got %i" % n)
    if T < 1:
        raise ValueError("sample count T must be >= 1, got %i" % T)
    data = chunked(T, rng, lambda gen, rows: gen.standard_normal((rows, n)))
    return SampleBatch(
        data=torch.from_numpy(data), master_seed=rng.master_seed, stream_index=rng.stream_index
    )


def normalized_rows(g: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Rows of g scaled to unit length; zero rows are redrawn from gen."""
    norms = np.linalg.norm(g, axis=1)
    # a zero row has probability zero but would divide by zero; redraw it
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = gen.standard_normal((int(bad.sum()), g.shape[1]))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def unit_sphere(n: int, rng: RngStream) -> TensorType["dim", torch.float64]:
    """One Haar-random direction on S^{n-1}."""
    if n < 1:
        raise ValueError("dimension n must be >= 1, got %i" % n)
    gen = rng.generator()
    v = normalized_rows(gen.standard_normal((1, n)), gen)[0]
    return torch.from_numpy(v)


def unit_sphere_batch(n: int, T: int, rng: RngStream) -> TensorType["num_samples", "dim", torch.float64]:
    if n < 1 or T < 1:
        raise ValueError("need n >= 1 and T >= 1, got n=%i, T=%i" % (n, T))
    data = chunked(T, rng, lambda gen, rows: normalized_rows(gen.standard_normal((rows, n)), gen))
    return torch.from_numpy(data)


def truncated_normal_from_uniform(lo: float, hi: float, u: np.ndarray) -> np.ndarray:
    """Map uniforms u in [0, 1) to N(0,1)|[lo, hi] by inverse CDF.

    Intervals entirely in the upper tail are inverted through the log survival function
    and intervals in the lower tail are mirrored, so lo up to 40 stays finite.

    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise EmptyInterval("truncation interval is empty: lo=%s >= hi=%s" % (lo, hi))
    u = np.asarray(u, dtype=float)
    if lo >= 0.0:
        x = _upper_tail_inverse(lo, hi, u)
    elif hi <= 0.0:
        x = -_upper_tail_inverse(-hi, -lo, u)
    else:
        p_lo = special.ndtr(lo)
        p_hi = special.ndtr(hi)
        x = norm_ppf(p_lo + u * (p_hi - p_lo))
    return np.clip(x, lo, hi)


def _upper_tail_inverse(lo: float, hi: float, u: np.ndarray) -> np.ndarray:
    # log Φc(lo), log Φc(hi); Φc(x) = Φ(-x)
    log_s_lo = special.log_ndtr(-lo)
    log_s_hi = special.log_ndtr(-hi) if math.isfinite(hi) else -np.inf
    # Φc(x) = Φc(lo) * (1 - u * (1 - Φc(hi)/Φc(lo)))
    ratio = np.exp(log_s_hi - log_s_lo)
    log_s = log_s_lo + np.log1p(-u * (1.0 - ratio))
    return -special.ndtri_exp(log_s)


def truncated_normal_1d(lo: float, hi: float, rng: RngStream) -> float:
    """One draw from N(0,1) conditioned on [lo, hi]; raises EmptyInterval if lo >= hi."""
    u = rng.generator().random(1)
    return float(truncated_normal_from_uniform(lo, hi, u)[0])


def truncated_normal_batch(
    lo: float, hi: float, T: int, rng: RngStream
) -> TensorType["num_samples", torch.float64]:
    if not float(lo) < float(hi):
        raise EmptyInterval("truncation interval is empty: lo=%s >= hi=%s" % (lo, hi))
    u = chunked(T, rng, lambda gen, rows: gen.random(rows))
    return torch.from_numpy(truncated_normal_from_uniform(lo, hi, u))

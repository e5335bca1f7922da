"""Wishart draws, densities and the log-density ratio behind the Gram-matrix reduction.

The Gram matrix of p samples drawn from N(0, I_n) is Wis(p, n); restricted to a hyperplane
through the origin it is Wis(p, n - 1). A tester that sees p samples therefore cannot do
better than a test between the two Wishart laws, whose TV distance is
E_{W ~ Wis(p, n-1)} (1 - exp(alpha_{p,n}(W)))_+ with alpha the log-density ratio.

"""

from dataclasses import dataclass
import math
from typing import Iterator, NamedTuple, Tuple
import warnings

import numpy as np
from scipy import special
import torch
from torchtyping import TensorType
from typeguard import typechecked

from convex_truncation.gauss.batch import PsdMatrix, SampleBatch
from convex_truncation.gauss.linalg import batched_chol_logdet
from convex_truncation.gauss.rng import RngStream

# float64 entries of the Gaussian factors held at once when drawing a stack of matrices
_MAX_FACTOR_FLOATS = 1 << 22


@dataclass(frozen=True)
class WishartParams:
    """Matrix size p and degrees of freedom n of Wis(p, n), with n >= p."""

    p: int
    n: int

    def __post_init__(self) -> None:
        if int(self.p) < 1:
            raise ValueError("Wishart size p must be >= 1, got %s" % self.p)
        if int(self.n) < int(self.p):
            raise ValueError(
                "Wishart degrees of freedom n must be >= p, got p=%s, n=%s" % (self.p, self.n)
            )
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "n", int(self.n))


def _draw_factors(params: WishartParams, streams) -> torch.Tensor:
    factors = np.stack([s.generator().standard_normal((params.n, params.p)) for s in streams])
    return torch.from_numpy(factors)


def _iter_wishart_chunks(
    params: WishartParams, draws: int, rng: RngStream
) -> Iterator[TensorType["chunk", "p", "p", torch.float64]]:
    per_chunk = max(1, _MAX_FACTOR_FLOATS // (params.n * params.p))
    for start in range(0, draws, per_chunk):
        streams = [rng.spawn(i) for i in range(start, min(draws, start + per_chunk))]
        G = _draw_factors(params, streams)
        S = torch.bmm(G.transpose(1, 2), G)
        yield 0.5 * (S + S.transpose(1, 2))


def wishart_sample(params: WishartParams, rng: RngStream) -> PsdMatrix:
    """S = Σ_i g_i g_iᵀ over n i.i.d. g_i ~ N(0, I_p)."""
    G = torch.from_numpy(rng.generator().standard_normal((params.n, params.p)))
    S = G.T @ G
    return PsdMatrix(entries=0.5 * (S + S.T))


def wishart_batch(
    params: WishartParams, draws: int, rng: RngStream
) -> TensorType["draws", "p", "p", torch.float64]:
    """A stack of independent Wishart draws; draw i is wishart_sample(params, rng.spawn(i))."""
    if draws < 1:
        raise ValueError("number of draws must be >= 1, got %i" % draws)
    return torch.cat(list(_iter_wishart_chunks(params, draws, rng)), dim=0)


def wishart_log_density(A: PsdMatrix, params: WishartParams) -> float:
    """log Ψ_{p,n}(A).

    ((n - p - 1)/2) logdet A - tr(A)/2 - (n p / 2) log 2 - log Γ_p(n/2), where the
    multivariate Gamma contributes (p (p - 1) / 4) log π + Σ_i log Γ((n + 1 - i)/2).

    Raises NotPositiveDefinite if A is not positive definite.

    """
    p, n = params.p, params.n
    if A.size != p:
        raise ValueError("matrix has size %i but the Wishart law has p=%i" % (A.size, p))
    A.factorize()
    trace = float(torch.trace(A.entries))
    return (
        0.5 * (n - p - 1) * A.logdet
        - 0.5 * trace
        - 0.5 * n * p * math.log(2.0)
        - float(special.multigammaln(0.5 * n, p))
    )


def _alpha_offset(p: int, n: int) -> float:
    """alpha_{p,n}(A) - logdet(A)/2."""
    if n <= p:
        raise ValueError("alpha_{p,n} needs n > p so that Wis(p, n - 1) exists, got p=%i, n=%i" % (p, n))
    if p % 2 == 0:
        return -sum(math.log(n - p + 2 * (i - 1)) for i in range(1, p // 2 + 1))
    warnings.warn(
        "alpha_{p,n} with odd p=%i: using the log-Gamma difference form instead of the even-p sum" % p
    )
    return -0.5 * p * math.log(2.0) - math.lgamma(0.5 * n) + math.lgamma(0.5 * (n - p))


def alpha_pn(A: PsdMatrix, p: int, n: int) -> float:
    """log Ψ_{p,n}(A) - log Ψ_{p,n-1}(A).

    For even p this is logdet(A)/2 - Σ_{i=1}^{p/2} log(n - p + 2(i - 1)); odd p uses the
    equivalent logdet(A)/2 - (p/2) log 2 - log Γ(n/2) + log Γ((n - p)/2) with a warning.

    """
    if A.size != p:
        raise ValueError("matrix has size %i, expected p=%i" % (A.size, p))
    offset = _alpha_offset(p, n)
    A.factorize()
    return 0.5 * A.logdet + offset


@typechecked
def estimate_tv_wishart(p: int, n: int, draws: int, rng: RngStream) -> Tuple[float, float]:
    """Monte Carlo estimate of d_TV(Wis(p, n), Wis(p, n - 1)).

    Args:
        p: matrix size (number of samples in the reduction), even, p <= n - 1
        n: ambient dimension
        draws: number of W ~ Wis(p, n - 1) draws, at least 1000
        rng: draw i uses rng.spawn(i)

    Returns:
        (estimate, stderr) of E (1 - exp(alpha_{p,n}(W)))_+

    """
    if draws < 1000:
        raise ValueError("the TV estimate needs at least 1000 draws, got %i" % draws)
    if p > n - 1:
        raise ValueError("need p <= n - 1, got p=%i, n=%i" % (p, n))
    offset = _alpha_offset(p, n)
    values = []
    for S in _iter_wishart_chunks(WishartParams(p=p, n=n - 1), draws, rng):
        _, logdets = batched_chol_logdet(S, check_pivots=False)
        values.append((1.0 - torch.exp(0.5 * logdets + offset)).clamp_min(0.0))
    values = torch.cat(values)
    return float(values.mean()), float(values.std(unbiased=True)) / math.sqrt(draws)


class LogdetClt(NamedTuple):
    mean: float
    std: float
    reference_std: float


@typechecked
def logdet_clt_check(p: int, n: int, trials: int, rng: RngStream) -> LogdetClt:
    """Centered log-determinants of Wis(p, n) against their Gaussian limit law.

    Each trial computes log det W - Σ_{i=1}^p log(n - i); as p/n -> y in (0, 1) these are
    asymptotically N(0, -2 log(1 - y)).

    """
    if not 0 < p < n:
        raise ValueError("need 0 < p/n < 1, got p=%i, n=%i" % (p, n))
    if trials < 2:
        raise ValueError("need at least 2 trials, got %i" % trials)
    center = sum(math.log(n - i) for i in range(1, p + 1))
    values = []
    for S in _iter_wishart_chunks(WishartParams(p=p, n=n), trials, rng):
        _, logdets = batched_chol_logdet(S, check_pivots=False)
        values.append(logdets - center)
    values = torch.cat(values)
    return LogdetClt(
        mean=float(values.mean()),
        std=float(values.std(unbiased=True)),
        reference_std=math.sqrt(-2.0 * math.log1p(-p / n)),
    )


def gram_matrix(batch: SampleBatch) -> PsdMatrix:
    """W_ij = <x_i, x_j> over the rows of the batch."""
    X = batch.data
    W = X @ X.T
    return PsdMatrix(entries=0.5 * (W + W.T))

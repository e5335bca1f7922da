"""Distances between centered Gaussians and the coupling statistic of the halfspace/slab bounds."""

from dataclasses import asdict, dataclass
import math
from typing import Any, Dict, Optional

import numpy as np
import torch
from typeguard import typechecked

from convex_truncation.gauss.batch import PsdMatrix
from convex_truncation.gauss.linalg import inverse, whitened_eigenvalues
from convex_truncation.gauss.rng import RngStream
from convex_truncation.lb.constructions import COUPLING_CONSTRUCTIONS, tuple_is_atypical
from convex_truncation.utils.parallel import map_trials


def gaussian_tv_bound(sigma_1: PsdMatrix, sigma_2: PsdMatrix) -> float:
    """Upper bound (3/2) min(1, |λ(Σ₁⁻¹Σ₂) - 1|₂) on d_TV(N(0, Σ₁), N(0, Σ₂)).

    Raises NotPositiveDefinite if either covariance is not positive definite.

    """
    eig = whitened_eigenvalues(sigma_1, sigma_2)
    return 1.5 * min(1.0, float(torch.linalg.norm(eig - 1.0)))


def _grid_logpdf(points: torch.Tensor, sigma: PsdMatrix) -> torch.Tensor:
    sigma.factorize()
    prec = inverse(sigma).entries
    quad = ((points @ prec) * points).sum(dim=1)
    return -0.5 * quad - 0.5 * sigma.logdet - math.log(2.0 * math.pi)


def gaussian_tv_quadrature_2d(
    sigma_1: PsdMatrix, sigma_2: PsdMatrix, grid_points: int = 1201, width: float = 9.0
) -> float:
    """d_TV of two centered bivariate Gaussians by a Riemann sum on a square grid.

    The square grid spans ±width standard deviations of the wider law along each axis.

    """
    if sigma_1.size != 2 or sigma_2.size != 2:
        raise ValueError("quadrature oracle is for 2 x 2 covariances only")
    scale = [
        width * math.sqrt(max(float(sigma_1.entries[i, i]), float(sigma_2.entries[i, i])))
        for i in range(2)
    ]
    axes = [torch.linspace(-s, s, grid_points, dtype=torch.float64) for s in scale]
    cell = float((axes[0][1] - axes[0][0]) * (axes[1][1] - axes[1][0]))
    xx, yy = torch.meshgrid(axes[0], axes[1], indexing="ij")
    points = torch.stack([xx.reshape(-1), yy.reshape(-1)], dim=1)
    diff = torch.exp(_grid_logpdf(points, sigma_1)) - torch.exp(_grid_logpdf(points, sigma_2))
    return 0.5 * float(diff.abs().sum()) * cell


@typechecked
def hellinger_sq_gaussians(n: int, delta: float) -> float:
    """H²(N(0, I_n), N(0, (1 - δ) I_n)) = 1 - (1 - δ)^{n/4} / (1 - δ/2)^{n/2}."""
    if n < 1:
        raise ValueError("dimension n must be >= 1, got %i" % n)
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1), got %s" % delta)
    return -math.expm1(0.25 * n * math.log1p(-delta) - 0.5 * n * math.log1p(-0.5 * delta))


@dataclass(frozen=True)
class CouplingBound:
    construction: str
    tv_bound: Optional[float]
    stderr: Optional[float]
    typical_fraction: float
    trials: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def coupling_covariance(G: np.ndarray, construction: str) -> np.ndarray:
    """Covariance of the m projections seen by the tester.

    - halfspace: Gram matrix of the normalized rows of G
    - slab: G Gᵀ / n

    """
    if construction == "halfspace":
        U = G / np.linalg.norm(G, axis=1, keepdims=True)
        return U @ U.T
    elif construction == "slab":
        return G @ G.T / G.shape[1]
    raise NotImplementedError(
        "unknown coupling construction '%s'; choose from %s"
        % (construction, list(COUPLING_CONSTRUCTIONS))
    )


@typechecked
def coupling_tv_bound(
    n: int,
    m: int,
    trials: int,
    rng: RngStream,
    C1: float = 3.0,
    construction: str = "halfspace",
    workers: Optional[int] = 1,
) -> CouplingBound:
    """Average Gaussian TV bound between N(0, I_m) and the law the tester sees, over typical tuples.

    Each trial draws m i.i.d. N(0, I_n) vectors g_1, ..., g_m (the hidden normals). The
    tuple is typical when the pairwise inner products are within C1 sqrt(log n / n) and,
    for slabs, the norms are within the same window of sqrt(n). A typical tuple contributes
    gaussian_tv_bound(I_m, Σ) with Σ from coupling_covariance; atypical tuples are counted
    against typical_fraction only.

    Args:
        n: ambient dimension
        m: tuple size, 1 <= m <= n
        trials: number of tuples drawn; trial i uses rng.spawn(i)
        rng: master stream
        C1: width of the typicality window
        construction: "halfspace" or "slab"
        workers: threads; never changes the result

    Returns:
        CouplingBound with the mean bound over typical tuples (None when no tuple is typical)

    """
    if construction not in COUPLING_CONSTRUCTIONS:
        raise NotImplementedError(
            "unknown coupling construction '%s'; choose from %s"
            % (construction, list(COUPLING_CONSTRUCTIONS))
        )
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n, got m=%i, n=%i" % (m, n))
    if trials < 1:
        raise ValueError("need at least one trial, got %i" % trials)
    identity = PsdMatrix(entries=torch.eye(m, dtype=torch.float64)).factorize()

    def _trial(i: int, stream: RngStream) -> Optional[float]:
        G = stream.generator().standard_normal((m, n))
        if tuple_is_atypical(G, C1, check_norms=construction == "slab"):
            return None
        sigma = PsdMatrix(entries=torch.from_numpy(coupling_covariance(G, construction)))
        return gaussian_tv_bound(identity, sigma)

    results = map_trials(_trial, trials, rng, workers=workers)
    bounds = np.array([r for r in results if r is not None])
    if len(bounds) == 0:
        mean, stderr = None, None
    else:
        mean = float(bounds.mean())
        stderr = float(bounds.std(ddof=1) / math.sqrt(len(bounds))) if len(bounds) > 1 else 0.0
    return CouplingBound(
        construction=construction,
        tv_bound=mean,
        stderr=stderr,
        typical_fraction=len(bounds) / trials,
        trials=trials,
    )

"""Dense linear algebra on PSD matrices."""

from typing import Tuple

import torch
from torchtyping import TensorType

from convex_truncation.errors import NotPositiveDefinite
from convex_truncation.gauss import TOLERANCES
from convex_truncation.gauss.batch import PsdMatrix


def _pivot_floor(entries: torch.Tensor) -> float:
    return TOLERANCES.pivot * max(float(torch.diagonal(entries, dim1=-2, dim2=-1).max()), 0.0)


def chol_logdet(A: PsdMatrix) -> Tuple[TensorType["p", "p", torch.float64], float]:
    """Lower Cholesky factor and log-determinant (2 Σ log diag).

    Raises NotPositiveDefinite when a squared pivot is <= 1e-12 x the largest diagonal
    entry, or when the factorization breaks down.

    """
    factor, info = torch.linalg.cholesky_ex(A.entries)
    if int(info) != 0:
        raise NotPositiveDefinite(
            "matrix is not positive definite (factorization failed at pivot %i)" % int(info)
        )
    pivots = torch.diagonal(factor) ** 2
    floor = _pivot_floor(A.entries)
    if float(pivots.min()) <= floor:
        raise NotPositiveDefinite(
            "matrix is numerically singular (pivot %.3e <= %.3e)" % (float(pivots.min()), floor)
        )
    logdet = 2.0 * float(torch.log(torch.diagonal(factor)).sum())
    return factor, logdet


def batched_chol_logdet(
    entries: TensorType["batch", "p", "p", torch.float64],
    check_pivots: bool = True,
) -> Tuple[TensorType["batch", "p", "p", torch.float64], TensorType["batch", torch.float64]]:
    """Vectorized chol_logdet over a stack of matrices.

    With check_pivots=False only a failed factorization raises; tiny but positive pivots
    are kept (random Wishart draws with p = n have a χ²(1) last pivot).

    """
    factor, info = torch.linalg.cholesky_ex(entries)
    if bool((info != 0).any()):
        bad = int(torch.nonzero(info)[0, 0])
        raise NotPositiveDefinite("matrix %i of the batch is not positive definite" % bad)
    diag = torch.diagonal(factor, dim1=-2, dim2=-1)
    floors = TOLERANCES.pivot * torch.diagonal(entries, dim1=-2, dim2=-1).max(dim=-1).values
    if check_pivots and bool(((diag ** 2).min(dim=-1).values <= floors).any()):
        raise NotPositiveDefinite("batch contains a numerically singular matrix")
    return factor, 2.0 * torch.log(diag).sum(dim=-1)


def inverse(A: PsdMatrix) -> PsdMatrix:
    """A⁻¹ through the cached Cholesky factor (cholesky_solve against the identity)."""
    A.factorize()
    eye = torch.eye(A.size, dtype=torch.float64)
    inv = torch.cholesky_solve(eye, A.chol)
    return PsdMatrix(entries=0.5 * (inv + inv.T))


def whitened_eigenvalues(
    sigma_1: PsdMatrix, sigma_2: PsdMatrix
) -> TensorType["p", torch.float64]:
    """Eigenvalues of Σ₁⁻¹Σ₂ via the similar symmetric matrix L⁻¹Σ₂L⁻ᵀ (Σ₁ = LLᵀ)."""
    if sigma_1.size != sigma_2.size:
        raise ValueError(
            "covariances must have the same size, got %i and %i" % (sigma_1.size, sigma_2.size)
        )
    sigma_1.factorize()
    sigma_2.factorize()
    left = torch.linalg.solve_triangular(sigma_1.chol, sigma_2.entries, upper=False)
    similar = torch.linalg.solve_triangular(sigma_1.chol, left.T, upper=False)
    return torch.linalg.eigvalsh(0.5 * (similar + similar.T))

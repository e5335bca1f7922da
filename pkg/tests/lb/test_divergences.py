"""Test the Gaussian TV bound, its quadrature oracle, Hellinger and the coupling statistic."""

import math

import numpy as np
import pytest
from scipy import stats
import torch


def test_gaussian_tv_bound_examples():

    from convex_truncation.gauss.batch import PsdMatrix
    from convex_truncation.lb.divergences import gaussian_tv_bound

    S = PsdMatrix(entries=[[2.0, 0.3], [0.3, 1.0]])
    assert gaussian_tv_bound(S, PsdMatrix(entries=[[2.0, 0.3], [0.3, 1.0]])) < 1e-12
    assert abs(gaussian_tv_bound(PsdMatrix(entries=1.0), PsdMatrix(entries=2.0)) - 1.5) < 1e-12
    # |(1.1, 0.9) - 1| = 0.1 sqrt(2)
    bound = gaussian_tv_bound(
        PsdMatrix(entries=torch.eye(2, dtype=torch.float64)),
        PsdMatrix(entries=[[1.1, 0.0], [0.0, 0.9]]),
    )
    assert abs(bound - 1.5 * 0.1 * math.sqrt(2.0)) < 1e-12


def test_gaussian_tv_bound_rejects_non_psd():

    from convex_truncation.errors import NotPositiveDefinite
    from convex_truncation.gauss.batch import PsdMatrix
    from convex_truncation.lb.divergences import gaussian_tv_bound

    with pytest.raises(NotPositiveDefinite):
        gaussian_tv_bound(
            PsdMatrix(entries=[[1.0, 2.0], [2.0, 1.0]]),
            PsdMatrix(entries=torch.eye(2, dtype=torch.float64)),
        )


def test_quadrature_oracle_on_product_law():

    from convex_truncation.gauss.batch import PsdMatrix
    from convex_truncation.lb.divergences import gaussian_tv_quadrature_2d

    # only the second coordinate differs: N(0, 1) against N(0, 4), densities cross at x0
    x0 = math.sqrt(8.0 * math.log(2.0) / 3.0)
    exact = (2.0 * stats.norm.cdf(x0) - 1.0) - (2.0 * stats.norm.cdf(x0 / 2.0) - 1.0)
    tv = gaussian_tv_quadrature_2d(
        PsdMatrix(entries=torch.eye(2, dtype=torch.float64)),
        PsdMatrix(entries=[[1.0, 0.0], [0.0, 4.0]]),
    )
    assert abs(tv - exact) < 1e-4

    with pytest.raises(ValueError):
        gaussian_tv_quadrature_2d(PsdMatrix(entries=1.0), PsdMatrix(entries=2.0))


def test_tv_bound_dominates_quadrature(rng):

    from convex_truncation.gauss.batch import PsdMatrix
    from convex_truncation.lb.divergences import gaussian_tv_bound, gaussian_tv_quadrature_2d

    identity = PsdMatrix(entries=torch.eye(2, dtype=torch.float64))
    for i, stream in enumerate(rng.spawn_many(20)):
        E = stream.generator().standard_normal((2, 2))
        # small perturbations first, then larger ones
        scale = 0.01 if i < 10 else 0.2
        sigma = np.eye(2) + scale * 0.5 * (E + E.T)
        sigma_2 = PsdMatrix(entries=sigma)
        assert gaussian_tv_bound(identity, sigma_2) >= gaussian_tv_quadrature_2d(identity, sigma_2)


def test_hellinger_sq_gaussians():

    from convex_truncation.lb.divergences import hellinger_sq_gaussians

    assert hellinger_sq_gaussians(100, 0.0) == 0.0
    value = hellinger_sq_gaussians(100, 0.01)
    assert abs(value / (0.01 ** 2 * 100 / 16.0) - 1.0) < 0.2

    # small delta: linear in n
    assert abs(hellinger_sq_gaussians(200, 1e-3) / hellinger_sq_gaussians(100, 1e-3) - 2.0) < 0.1

    # matches the general formula for N(0, I) against N(0, (1 - δ) I)
    n, delta = 7, 0.3
    bc = (1.0 - delta) ** (n / 4.0) / (1.0 - delta / 2.0) ** (n / 2.0)
    assert abs(hellinger_sq_gaussians(n, delta) - (1.0 - bc)) < 1e-14
    # large n stays below 1 and finite
    assert 0.0 < hellinger_sq_gaussians(10 ** 6, 0.5) <= 1.0

    with pytest.raises(ValueError):
        hellinger_sq_gaussians(10, 1.0)
    with pytest.raises(ValueError):
        hellinger_sq_gaussians(0, 0.1)


def test_coupling_covariance():

    from convex_truncation.lb.divergences import coupling_covariance

    G = np.array([[3.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0]])
    assert np.allclose(coupling_covariance(G, "halfspace"), np.eye(2))
    assert np.allclose(coupling_covariance(G, "slab"), np.diag([9.0 / 4.0, 1.0]))
    with pytest.raises(NotImplementedError):
        coupling_covariance(G, "simplex")


def test_coupling_tv_bound(rng):

    from convex_truncation.lb.divergences import coupling_tv_bound

    for construction in ["halfspace", "slab"]:
        result = coupling_tv_bound(400, 3, 200, rng, construction=construction)
        assert result.typical_fraction > 0.9
        assert 0.0 < result.tv_bound <= 1.5
        assert result.stderr >= 0.0

    # more normals in the same dimension move the tester's law further from N(0, I_m)
    few = coupling_tv_bound(400, 2, 200, rng.spawn(1))
    many = coupling_tv_bound(400, 8, 200, rng.spawn(2))
    assert few.tv_bound < many.tv_bound

    # an empty window rules every tuple atypical
    none = coupling_tv_bound(400, 3, 50, rng, C1=1e-9)
    assert none.typical_fraction == 0.0
    assert none.tv_bound is None

    with pytest.raises(ValueError):
        coupling_tv_bound(10, 11, 10, rng)
    with pytest.raises(NotImplementedError):
        coupling_tv_bound(10, 2, 10, rng, construction="ball")


def test_coupling_tv_bound_worker_invariant(rng):

    from convex_truncation.lb.divergences import coupling_tv_bound

    one = coupling_tv_bound(100, 4, 100, rng, workers=1)
    many = coupling_tv_bound(100, 4, 100, rng, workers=3)
    assert one == many

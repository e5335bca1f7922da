"""Scalar and vectorized special functions: normal quantiles, chi-square laws.

All chi-square helpers work in log space where the lower tail underflows; the
construction in `convex_truncation.lb.mixture` evaluates χ² CDFs far below 1e-300.

"""

import math
from typing import Union

import numpy as np
from scipy import special

from convex_truncation.gauss import TOLERANCES

ArrayLike = Union[float, np.ndarray]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def norm_logpdf(x: ArrayLike) -> ArrayLike:
    return -0.5 * np.square(x) - _LOG_SQRT_2PI


def norm_pdf(x: ArrayLike) -> ArrayLike:
    return np.exp(norm_logpdf(x))


def norm_ppf(p: ArrayLike) -> ArrayLike:
    """Φ⁻¹(p) refined by one Newton step on the CDF."""
    x = special.ndtri(p)
    finite = np.isfinite(x)
    step = np.where(finite, (special.ndtr(x) - p) / np.where(finite, norm_pdf(x), 1.0), 0.0)
    return x - step


def norm_isf(q: ArrayLike) -> ArrayLike:
    """Inverse of the upper tail, x with 1 - Φ(x) = q; stable for tiny q."""
    x = -special.ndtri(q)
    finite = np.isfinite(x)
    # Φc(x) - q, differentiated: -φ(x)
    step = np.where(finite, (special.ndtr(-x) - q) / np.where(finite, norm_pdf(x), 1.0), 0.0)
    return x + step


def chi2_logpdf(x: ArrayLike, k: float) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    half = 0.5 * k
    with np.errstate(divide="ignore"):
        out = (half - 1.0) * np.log(x) - 0.5 * x - half * math.log(2.0) - special.gammaln(half)
    return np.where(x > 0, out, -np.inf)


def chi2_cdf(x: ArrayLike, k: float) -> ArrayLike:
    return special.gammainc(0.5 * k, np.maximum(np.asarray(x, dtype=float), 0.0) / 2.0)


def chi2_logcdf(x: ArrayLike, k: float, max_terms: int = 5000) -> ArrayLike:
    """log P[χ²(k) <= x], accurate far into the lower tail.

    Below the mode the lower regularized gamma function is summed as
    P(a, z) = z^a e^{-z} / Γ(a+1) · Σ_j z^j / ((a+1)...(a+j)), in log space.

    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = 0.5 * k
    z = np.maximum(x, 0.0) / 2.0
    out = np.full(x.shape, -np.inf)
    upper = z >= a
    with np.errstate(divide="ignore"):
        out[upper] = np.log(special.gammainc(a, z[upper]))
    lower = (~upper) & (z > 0)
    if np.any(lower):
        zl = z[lower]
        total = np.ones_like(zl)
        term = np.ones_like(zl)
        for j in range(1, max_terms + 1):
            term = term * zl / (a + j)
            total = total + term
            if np.all(term < 1e-17 * total):
                break
        out[lower] = a * np.log(zl) - zl - special.gammaln(a + 1.0) + np.log(total)
    return float(out[0]) if scalar else out


def chi2_quantile(
    q: ArrayLike,
    k: float,
    upper: float = None,
    iters: int = TOLERANCES.bisection_iters,
    tol: float = TOLERANCES.bisection_tol,
) -> ArrayLike:
    """Bisection for x with P[χ²(k) <= x] = q, vectorized over q.

    When `upper` is given the search is restricted to [0, upper]; this is how the
    truncated law χ²(k)|[0, R] is inverted (pass q = u · P[χ²(k) <= R]).

    """
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ValueError("quantile levels must lie in [0, 1]")
    if upper is None:
        # mean + 40 sd covers every representable level
        upper = k + 40.0 * math.sqrt(2.0 * k) + 40.0
    lo = np.zeros_like(q)
    hi = np.full_like(q, float(upper))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = chi2_cdf(mid, k) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol * np.maximum(1.0, hi)):
            break
    return 0.5 * (lo + hi)

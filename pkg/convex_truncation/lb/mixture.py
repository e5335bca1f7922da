"""A mixture of hyperplane-ball truncations that imitates a shrunk Gaussian.

N(0, (1 - δ) I_n) = N(0, (1 + δ')⁻¹ I_n) is approximated by the mixture P whose component
is N(0, I_n) restricted to H ∩ Ball(sqrt(R)), with H a Haar-random hyperplane through the
origin and R drawn from the mixing density λ. The general flow is:
- the un-truncated weight λ(R) = -g'(R) ψ(R), with g(R) = K sqrt(R) exp(-δ'R/2) and ψ the
  χ²(n - 1) CDF, has total mass 1 but is negative below 1/δ'
- its signed cumulative mass has the closed form
  F(a) = P[χ²(n) <= (1 + δ')a] - g(a) ψ(a)
- a* > 1/δ' is the root of F; λ is zeroed below a*, which keeps total mass 1
- the squared norm of a draw from P then has density S, equal to the density p of
  χ²(n, (1 + δ')⁻¹) on [a*, ∞), so d_TV(P, N(0, (1 + δ')⁻¹ I_n)) <= P_p[Y <= a*]

"""

from dataclasses import asdict, dataclass, replace
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, special
import torch
from typeguard import typechecked

from convex_truncation.errors import RootNotBracketed
from convex_truncation.gauss import TOLERANCES
from convex_truncation.gauss.batch import SampleBatch
from convex_truncation.gauss.primitives import chunked, normalized_rows
from convex_truncation.gauss.rng import RngStream
from convex_truncation.gauss.special import chi2_cdf, chi2_logcdf, chi2_logpdf, chi2_quantile

# outer end of the a* bracket, in units of n
A_STAR_BRACKET = 50.0


@dataclass(frozen=True)
class MixtureLbParams:
    """Parameters of the mixture construction.

    delta defaults to C / n; a_star is filled in by mixture_lb_weights. The density check
    evaluates `grid_points` points of [a*, 3n] with quadrature tolerance `epsrel`.

    """

    n: int
    delta: Optional[float] = None
    C: float = 20.0
    a_star: Optional[float] = None
    grid_points: int = 50
    epsrel: float = 1e-10

    def __post_init__(self) -> None:
        if int(self.n) < 2:
            raise ValueError("mixture construction needs n >= 2, got %s" % self.n)
        object.__setattr__(self, "n", int(self.n))
        if self.delta is None:
            object.__setattr__(self, "delta", self.C / self.n)
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1), got %s" % self.delta)
        if self.a_star is not None and not self.a_star > 1.0 / self.delta_prime:
            raise ValueError(
                "a_star must exceed 1/delta' = %s, got %s" % (1.0 / self.delta_prime, self.a_star)
            )
        if self.grid_points < 1:
            raise ValueError("grid_points must be >= 1, got %i" % self.grid_points)

    @classmethod
    def from_delta_prime(cls, n: int, delta_prime: float, **kwargs) -> "MixtureLbParams":
        if not delta_prime > 0:
            raise ValueError("delta' must be positive, got %s" % delta_prime)
        return cls(n=n, delta=delta_prime / (1.0 + delta_prime), **kwargs)

    @property
    def delta_prime(self) -> float:
        """δ' with 1 - δ = (1 + δ')⁻¹."""
        return self.delta / (1.0 - self.delta)

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["delta_prime"] = self.delta_prime
        return out


class MixtureLbWeights:
    """The mixing density λ of a solved construction; call it on R to evaluate λ(R)."""

    def __init__(self, params: MixtureLbParams) -> None:
        self.params = params
        n, dp = params.n, params.delta_prime
        self.n = n
        self.delta_prime = dp
        self.log_K = (
            math.lgamma(0.5 * (n - 1))
            - math.lgamma(0.5 * n)
            - 0.5 * math.log(2.0)
            + 0.5 * n * math.log1p(dp)
        )

    @property
    def a_star(self) -> float:
        return self.params.a_star

    def log_g(self, R: Any) -> np.ndarray:
        R = np.asarray(R, dtype=float)
        return self.log_K + 0.5 * np.log(R) - 0.5 * self.delta_prime * R

    def log_psi(self, R: Any) -> np.ndarray:
        return chi2_logcdf(R, self.n - 1)

    def untruncated(self, R: Any) -> np.ndarray:
        """-g'(R) ψ(R); negative exactly on (0, 1/δ')."""
        R = np.asarray(R, dtype=float)
        dp = self.delta_prime
        safe = np.where(R > 0, R, 1.0)
        log_scale = self.log_K - 0.5 * dp * safe + self.log_psi(safe) - np.log(2.0 * np.sqrt(safe))
        return np.where(R > 0, np.exp(log_scale) * (dp * R - 1.0), 0.0)

    def __call__(self, R: Any) -> np.ndarray:
        R = np.asarray(R, dtype=float)
        if self.a_star is None:
            raise ValueError("a_star is not set; build the weights with mixture_lb_weights")
        return np.where(R >= self.a_star, self.untruncated(np.maximum(R, self.a_star)), 0.0)

    def log_balance(self, a: Any) -> np.ndarray:
        """log P[χ²(n) <= (1 + δ')a] - log(g(a) ψ(a)); positive exactly where F(a) > 0."""
        a = np.asarray(a, dtype=float)
        return chi2_logcdf((1.0 + self.delta_prime) * a, self.n) - self.log_g(a) - self.log_psi(a)

    def signed_mass(self, a: Any) -> np.ndarray:
        """F(a) = ∫_0^a of the un-truncated λ."""
        a = np.asarray(a, dtype=float)
        first = chi2_logcdf((1.0 + self.delta_prime) * a, self.n)
        return np.exp(first) - np.exp(self.log_g(a) + self.log_psi(a))

    def mass_above(self, a: Any) -> np.ndarray:
        """∫_a^∞ of the un-truncated λ, 1 - F(a), without cancellation in the upper tail."""
        a = np.asarray(a, dtype=float)
        sf = special.gammaincc(0.5 * self.n, 0.5 * (1.0 + self.delta_prime) * a)
        return sf + np.exp(self.log_g(a)) * chi2_cdf(a, self.n - 1)

    def log_p(self, x: Any) -> np.ndarray:
        """log density of χ²(n, (1 + δ')⁻¹)."""
        x = np.asarray(x, dtype=float)
        return chi2_logpdf((1.0 + self.delta_prime) * x, self.n) + math.log1p(self.delta_prime)

    def tail_bound(self) -> float:
        """P[χ²(n, (1 + δ')⁻¹) <= a*], the TV bound of the construction."""
        return float(chi2_cdf((1.0 + self.delta_prime) * self.a_star, self.n))


def _bisect_a_star(weights: MixtureLbWeights) -> float:
    n = weights.n
    lo, hi = 1.0 / weights.delta_prime, A_STAR_BRACKET * n
    if not lo < hi:
        raise RootNotBracketed(
            "empty bracket (1/delta', %gn] = (%s, %s] for a*" % (A_STAR_BRACKET, lo, hi)
        )
    d_lo, d_hi = float(weights.log_balance(lo)), float(weights.log_balance(hi))
    if not (d_lo < 0.0 < d_hi):
        raise RootNotBracketed(
            "signed mass of the mixing weights does not change sign on (%s, %s] "
            "(log balance %s at 1/delta', %s at %gn)" % (lo, hi, d_lo, d_hi, A_STAR_BRACKET)
        )
    for _ in range(TOLERANCES.bisection_iters):
        mid = 0.5 * (lo + hi)
        if float(weights.log_balance(mid)) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= TOLERANCES.bisection_tol * hi:
            break
    return 0.5 * (lo + hi)


def mixture_lb_weights(params: MixtureLbParams) -> MixtureLbWeights:
    """Solve for a* and return the truncated mixing density.

    Raises RootNotBracketed if the signed-mass balance has no root in (1/δ', 50n].

    """
    if params.n < 20:
        raise ValueError("the mixture construction degenerates below n = 20, got n=%i" % params.n)
    a_star = _bisect_a_star(MixtureLbWeights(replace(params, a_star=None)))
    return MixtureLbWeights(replace(params, a_star=a_star))


def lambda_mass_quadrature(weights: MixtureLbWeights, lo: float, hi: float = math.inf) -> float:
    """∫_lo^hi of the un-truncated λ by adaptive quadrature; the check on the closed forms."""
    n = weights.n
    breaks = sorted({b for b in (1.0 / weights.delta_prime, float(n), 2.0 * n) if lo < b < hi})
    edges = [lo] + breaks + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(
            lambda r: float(weights.untruncated(r)), a, b,
            epsabs=0.0, epsrel=weights.params.epsrel, limit=200,
        )
        total += value
    return total


def mixture_lb_density(weights: MixtureLbWeights, x: float) -> float:
    """S(x) = ∫ λ(R) q_R(x) dR by quadrature over R in [max(a*, x), ∞).

    q_R is the χ²(n - 1) density restricted to [0, R], so λ(R) q_R(x) = f_{n-1}(x) λ(R)/ψ(R)
    and the ψ factors cancel; the integral is taken in the shifted variable t = R - max(a*, x)
    with the exp(-δ' max(a*, x) / 2) scale pulled out.

    """
    if not x > 0:
        return 0.0
    dp = weights.delta_prime
    r0 = max(weights.a_star, float(x))
    value, _ = integrate.quad(
        lambda t: math.exp(-0.5 * dp * t) * (dp * (r0 + t) - 1.0) / (2.0 * math.sqrt(r0 + t)),
        0.0, math.inf,
        epsabs=0.0, epsrel=min(weights.params.epsrel, 1e-11), limit=200,
    )
    log_s = float(chi2_logpdf(x, weights.n - 1)) + weights.log_K - 0.5 * dp * r0 + math.log(value)
    return math.exp(log_s)


@dataclass
class DensityCheck:
    max_abs_diff: float
    max_rel_diff: float
    tail_bound: float
    a_star: float
    grid: List[float]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def mixture_lb_density_check(
    weights: MixtureLbWeights, x_grid: Optional[Sequence[float]] = None
) -> DensityCheck:
    """Largest gap between S and p over grid points x >= a*, and the construction's TV bound.

    The default grid is `grid_points` evenly spaced points of [a*, 3n].

    """
    if weights.a_star is None:
        raise ValueError("a_star is not set; build the weights with mixture_lb_weights")
    if x_grid is None:
        x_grid = np.linspace(weights.a_star, 3.0 * weights.n, weights.params.grid_points)
    grid = [float(x) for x in x_grid if x >= weights.a_star]
    max_abs, max_rel = 0.0, 0.0
    for x in grid:
        s = mixture_lb_density(weights, x)
        p = math.exp(float(weights.log_p(x)))
        max_abs = max(max_abs, abs(s - p))
        max_rel = max(max_rel, abs(s - p) / p)
    return DensityCheck(
        max_abs_diff=max_abs,
        max_rel_diff=max_rel,
        tail_bound=weights.tail_bound(),
        a_star=weights.a_star,
        grid=grid,
    )


def sample_mixing_radii(weights: MixtureLbWeights, u: np.ndarray) -> np.ndarray:
    """Inverse CDF of λ: R with ∫_{a*}^R λ = u, by vectorized bisection on mass_above."""
    target = 1.0 - np.asarray(u, dtype=float)
    lo = np.full(target.shape, weights.a_star)
    hi = np.full(target.shape, A_STAR_BRACKET * weights.n)
    for _ in range(TOLERANCES.bisection_iters):
        mid = 0.5 * (lo + hi)
        above = weights.mass_above(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= TOLERANCES.bisection_tol * hi):
            break
    return 0.5 * (lo + hi)


@typechecked
def sample_mixture_lb(weights: MixtureLbWeights, T: int, rng: RngStream) -> SampleBatch:
    """T i.i.d. draws from the mixture P.

    Each row draws its own Haar hyperplane normal v and radius R ~ λ, then returns
    u sqrt(y) with u Haar on the unit sphere of v-perp and y ~ χ²(n - 1) | [0, R]. Chunk j
    of the block uses rng.spawn(j).

    """
    if weights.a_star is None:
        raise ValueError("a_star is not set; build the weights with mixture_lb_weights")
    if T < 1:
        raise ValueError("sample count T must be >= 1, got %i" % T)
    n = weights.n

    def _draw(gen: np.random.Generator, rows: int) -> np.ndarray:
        v = normalized_rows(gen.standard_normal((rows, n)), gen)
        g = gen.standard_normal((rows, n))
        dirs = normalized_rows(g - (g * v).sum(axis=1, keepdims=True) * v, gen)
        R = sample_mixing_radii(weights, gen.random(rows))
        mass = chi2_cdf(R, n - 1)
        y = chi2_quantile(gen.random(rows) * mass, n - 1, upper=float(R.max()))
        return dirs * np.sqrt(np.minimum(y, R))[:, None]

    data = chunked(T, rng, _draw)
    return SampleBatch(
        data=torch.from_numpy(data), master_seed=rng.master_seed, stream_index=rng.stream_index
    )

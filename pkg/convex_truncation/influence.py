"""Truncated-Gaussian moments, Mills ratio and convex-influence estimators."""

from dataclasses import dataclass
import math
from typing import List, Optional, Tuple, Union

from scipy import special
import torch
from typeguard import typechecked

from convex_truncation.bodies.bodies import ConvexBody, as_direction
from convex_truncation.bodies.spec import TruncationSpec, as_spec
from convex_truncation.gauss.batch import SampleBatch
from convex_truncation.gauss.primitives import gaussian_batch
from convex_truncation.gauss.rng import RngStream
from convex_truncation.gauss.special import norm_logpdf, norm_pdf, norm_ppf

Target = Union[TruncationSpec, ConvexBody]

_SQRT2 = math.sqrt(2.0)
# above this cut the naive tail ratio loses all digits
_MILLS_SWITCH = 5.0


def log_mills_ratio(b: float) -> float:
    """log((1 - Φ(b)) / φ(b)), finite for every |b| <= 40.

    The tail and the density are combined as logs so that neither underflows; above b = 5
    the scaled complementary error function takes over.

    """
    b = float(b)
    if not math.isfinite(b) or abs(b) > 40:
        raise ValueError("mills_ratio needs finite |b| <= 40, got %s" % b)
    if b > _MILLS_SWITCH:
        return math.log(math.sqrt(math.pi / 2.0) * float(special.erfcx(b / _SQRT2)))
    return float(special.log_ndtr(-b) - norm_logpdf(b))


def mills_ratio(b: float) -> float:
    """(1 - Φ(b)) / φ(b).

    For b below about -37.6 the ratio is larger than the biggest float64 and inf is returned;
    use log_mills_ratio there.

    """
    try:
        return math.exp(log_mills_ratio(b))
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class TruncatedMoments:
    """Raw moments of N(0, 1) conditioned on [b, ∞)."""

    b: float
    M1: float
    M2: float
    M3: float
    M4: float

    @property
    def variance(self) -> float:
        return self.M2 - self.M1 ** 2


def truncated_moments(b: float) -> TruncatedMoments:
    # exp(-log R) tends to 0 where R itself overflows
    inv_R = math.exp(-log_mills_ratio(b))
    b = float(b)
    return TruncatedMoments(
        b=b,
        M1=inv_R,
        M2=1.0 + b * inv_R,
        M3=(2.0 + b * b) * inv_R,
        M4=3.0 + (b ** 3 + 3.0 * b) * inv_R,
    )


@dataclass(frozen=True)
class InfluenceEstimate:
    # unit vector, axis index, or "total"
    direction: Union[List[float], int, str]
    value: float
    stderr: float
    trials: int


def _probe(target: TruncationSpec, trials: int, rng: RngStream, probe: Optional[SampleBatch]) -> SampleBatch:
    if probe is not None:
        if probe.dim != target.n:
            raise ValueError("probe has dimension %i, target %i" % (probe.dim, target.n))
        return probe
    if trials < 1000:
        raise ValueError("influence estimators need at least 1000 trials, got %i" % trials)
    return gaussian_batch(target.n, trials, rng)


def _mean_and_stderr(values: torch.Tensor) -> Tuple[float, float]:
    count = values.shape[0]
    mean = float(values.mean())
    std = float(values.std(unbiased=True)) if count > 1 else 0.0
    return mean, std / math.sqrt(count)


def convex_influence(
    target: Target,
    v,
    trials: int = 100000,
    rng: Optional[RngStream] = None,
    probe: Optional[SampleBatch] = None,
) -> InfluenceEstimate:
    """Monte Carlo estimate of E[K(x) (1 - <v, x>²)] / √2 under N(0, I_n).

    Args:
        target: body or mixture; a mixture contributes its weighted indicator
        v: unit direction
        trials: number of Gaussian probes (at least 1000) when no probe is given
        rng: stream for the probe block
        probe: reuse an existing N(0, I_n) block (common random numbers)

    Returns:
        InfluenceEstimate with the sample-std / sqrt(trials) error of the integrand

    """
    spec = as_spec(target)
    v = as_direction(v)
    if v.numel() != spec.n:
        raise ValueError("direction has dimension %i, target %i" % (v.numel(), spec.n))
    x = _probe(spec, trials, rng, probe).data
    integrand = spec.indicator(x) * (1.0 - (x @ v) ** 2) / _SQRT2
    value, stderr = _mean_and_stderr(integrand)
    return InfluenceEstimate(direction=v.tolist(), value=value, stderr=stderr, trials=x.shape[0])


def total_convex_influence(
    target: Target,
    trials: int = 100000,
    rng: Optional[RngStream] = None,
    probe: Optional[SampleBatch] = None,
) -> InfluenceEstimate:
    """E[K(x) (n - |x|²)] / √2; the sum of the n axis influences."""
    spec = as_spec(target)
    x = _probe(spec, trials, rng, probe).data
    integrand = spec.indicator(x) * (spec.n - (x * x).sum(dim=1)) / _SQRT2
    value, stderr = _mean_and_stderr(integrand)
    return InfluenceEstimate(direction="total", value=value, stderr=stderr, trials=x.shape[0])


def axis_influences(
    target: Target,
    trials: int = 100000,
    rng: Optional[RngStream] = None,
    probe: Optional[SampleBatch] = None,
) -> List[InfluenceEstimate]:
    """Influence of every coordinate axis, all from one probe block."""
    spec = as_spec(target)
    x = _probe(spec, trials, rng, probe).data
    weight = spec.indicator(x)
    integrands = weight[:, None] * (1.0 - x * x) / _SQRT2
    out = []
    for i in range(spec.n):
        value, stderr = _mean_and_stderr(integrands[:, i])
        out.append(InfluenceEstimate(direction=i, value=value, stderr=stderr, trials=x.shape[0]))
    return out


def conditional_sq_norm(
    target: Target,
    trials: int = 100000,
    rng: Optional[RngStream] = None,
    probe: Optional[SampleBatch] = None,
) -> Tuple[float, float]:
    """E_{N|K}[|x|²] as the ratio Σ K(x)|x|² / Σ K(x) over a Gaussian probe.

    Returns:
        tuple
            - estimate (float)
            - stderr (float): delta-method error of the ratio estimator

    """
    spec = as_spec(target)
    x = _probe(spec, trials, rng, probe).data
    w = spec.indicator(x)
    sq = (x * x).sum(dim=1)
    w_mean = float(w.mean())
    if w_mean == 0.0:
        raise ValueError("no probe landed in the target; cannot condition on it")
    ratio = float((w * sq).mean()) / w_mean
    residual = w * (sq - ratio)
    stderr = float(residual.std(unbiased=True)) / (w_mean * math.sqrt(x.shape[0]))
    return ratio, stderr


@typechecked
def gaussian_isoperimetric_lb(eps: float) -> float:
    """√(2/π) min(ε, 1 - ε), a lower bound on the Gaussian isoperimetric profile."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1), got %s" % eps)
    return math.sqrt(2.0 / math.pi) * min(eps, 1.0 - eps)


@typechecked
def gaussian_isoperimetric_profile(eps: float) -> float:
    """φ(Φ⁻¹(ε))."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1), got %s" % eps)
    return float(norm_pdf(norm_ppf(eps)))


def shifted_vempala_ceiling(mu: float, b: float) -> float:
    """Ceiling 1 + μ² - e^{-(b - μ)²} / (2π) on E[x²] for a Gaussian restricted to (-∞, b]."""
    return 1.0 + mu ** 2 - math.exp(-((b - mu) ** 2)) / (2.0 * math.pi)

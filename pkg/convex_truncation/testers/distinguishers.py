"""Distinguishers deciding whether a sample came from N(0, I_n) or a truncation of it.

Each algorithm is its own class; an initialized distinguisher stores the TestConfig it runs
with (n, eps, threshold constants). The general flow of each distinguisher is:
- input: a T x n sample batch
- step 0: check the batch matches the configured dimension, flag underpowered runs
- step 1: compute the statistics (M, |L|², N)
- step 2: compute the thresholds for this T
- step 3: decide the verdict; equality at a strict threshold is "untruncated"
- step 4: return a TestReport

"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Type
import warnings

from convex_truncation.errors import DimensionMismatch
from convex_truncation.gauss.batch import SampleBatch
from convex_truncation.testers.calibration import ALGORITHMS, required_samples
from convex_truncation.testers.constants import DEFAULT_CONSTANTS
from convex_truncation.testers.statistics import statistic_L_normsq, statistic_M, statistic_N

TRUNCATED = "truncated"
UNTRUNCATED = "untruncated"


@dataclass
class TestConfig:
    """Parameters of one distinguisher run.

    `eps_from_budget` marks an eps derived from a fixed sample budget (see
    budget_epsilon); such an eps is a resolution and may exceed 1.

    """

    __test__ = False

    n: int
    eps: float
    T: Optional[int] = None
    c_sym: float = DEFAULT_CONSTANTS.c_sym
    C_sample: float = DEFAULT_CONSTANTS.C_sample
    L_threshold: float = DEFAULT_CONSTANTS.L_threshold
    N_threshold_c: float = DEFAULT_CONSTANTS.N_threshold_c
    delta: float = DEFAULT_CONSTANTS.delta
    eps_from_budget: bool = False

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise ValueError("n must be >= 1, got %s" % self.n)
        self.n = int(self.n)
        self.eps = float(self.eps)
        if self.eps_from_budget:
            if not self.eps > 0:
                raise ValueError("eps must be positive, got %s" % self.eps)
        elif not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1), got %s" % self.eps)
        if self.T is not None and int(self.T) < 1:
            raise ValueError("T must be >= 1, got %s" % self.T)

    def required_T(self, algorithm: str) -> int:
        return required_samples(algorithm, self.n, self.eps, self.C_sample)

    def resolved_T(self, algorithm: str) -> int:
        """Configured T, or the auto-sized one."""
        return int(self.T) if self.T is not None else self.required_T(algorithm)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TestReport:

    __test__ = False

    algorithm: str
    verdict: str
    statistic_M: float
    T: int
    n: int
    eps: float
    thresholds: Dict[str, float]
    statistic_L_normsq: Optional[float] = None
    statistic_N: Optional[float] = None
    seed: Optional[int] = None
    stream: Optional[int] = None
    constants_version: str = DEFAULT_CONSTANTS.version
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def truncated(self) -> bool:
        return self.verdict == TRUNCATED

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class Distinguisher:
    """Parent class for all distinguishers."""

    algorithm = "base"

    def __init__(self, config: TestConfig) -> None:
        self.config = config

    def compute_statistics(self, batch: SampleBatch) -> Dict[str, float]:
        raise NotImplementedError

    def compute_thresholds(self, T: int) -> Dict[str, float]:
        raise NotImplementedError

    def decide(self, stats: Dict[str, float], thresholds: Dict[str, float]) -> bool:
        raise NotImplementedError

    def check_batch(self, batch: SampleBatch) -> Dict[str, Any]:
        if batch.dim != self.config.n:
            raise DimensionMismatch(
                "config has n=%i but the batch has dimension %i" % (self.config.n, batch.dim)
            )
        required = self.config.required_T(self.algorithm)
        underpowered = batch.count < required
        if underpowered:
            warnings.warn(
                "underpowered %s test: T=%i is below the auto-sized T=%i for n=%i, eps=%s"
                % (self.algorithm, batch.count, required, self.config.n, self.config.eps)
            )
        return {"underpowered": underpowered, "required_T": required}

    def __call__(self, batch: SampleBatch) -> TestReport:
        diagnostics = self.check_batch(batch)
        stats = self.compute_statistics(batch)
        thresholds = self.compute_thresholds(batch.count)
        truncated = self.decide(stats, thresholds)
        return TestReport(
            algorithm=self.algorithm,
            verdict=TRUNCATED if truncated else UNTRUNCATED,
            statistic_M=stats["M"],
            statistic_L_normsq=stats.get("L_normsq"),
            statistic_N=stats.get("N"),
            T=batch.count,
            n=batch.dim,
            eps=self.config.eps,
            thresholds=thresholds,
            seed=batch.master_seed,
            stream=batch.stream_index,
            diagnostics=diagnostics,
        )

    def _M_threshold(self) -> float:
        return self.config.n - self.config.c_sym * self.config.eps / 2.0


class SymmConvexDistinguisher(Distinguisher):
    """Mean squared norm test for symmetric convex sets and their mixtures."""

    algorithm = "symm"

    def compute_statistics(self, batch: SampleBatch) -> Dict[str, float]:
        return {"M": statistic_M(batch)}

    def compute_thresholds(self, T: int) -> Dict[str, float]:
        return {"M": self._M_threshold()}

    def decide(self, stats: Dict[str, float], thresholds: Dict[str, float]) -> bool:
        return stats["M"] < thresholds["M"]


class ConvexDistinguisher(Distinguisher):
    """Norm test plus a robust-mean test, for general convex sets."""

    algorithm = "convex"

    def compute_statistics(self, batch: SampleBatch) -> Dict[str, float]:
        return {
            "M": statistic_M(batch),
            "L_normsq": statistic_L_normsq(batch, self.config.delta),
        }

    def compute_thresholds(self, T: int) -> Dict[str, float]:
        return {"M": self._M_threshold(), "L_normsq": self.config.L_threshold}

    def decide(self, stats: Dict[str, float], thresholds: Dict[str, float]) -> bool:
        return stats["M"] <= thresholds["M"] or stats["L_normsq"] >= thresholds["L_normsq"]


class LtfDistinguisher(Distinguisher):
    """Squared norm of the empirical mean, for halfspaces."""

    algorithm = "ltf"

    def compute_statistics(self, batch: SampleBatch) -> Dict[str, float]:
        return {"M": statistic_M(batch), "N": statistic_N(batch)}

    def compute_thresholds(self, T: int) -> Dict[str, float]:
        return {"N": self.config.n / T + self.config.N_threshold_c * self.config.eps ** 2}

    def decide(self, stats: Dict[str, float], thresholds: Dict[str, float]) -> bool:
        return stats["N"] >= thresholds["N"]


def get_distinguisher_classes() -> Dict[str, Type[Distinguisher]]:
    distinguisher_dict = {
        "symm": SymmConvexDistinguisher,
        "convex": ConvexDistinguisher,
        "ltf": LtfDistinguisher,
    }
    return distinguisher_dict


def run_distinguisher(algorithm: str, batch: SampleBatch, config: TestConfig) -> TestReport:
    distinguisher_classes = get_distinguisher_classes()
    if algorithm not in distinguisher_classes:
        raise NotImplementedError(
            "unknown algorithm '%s'; choose from %s" % (algorithm, list(ALGORITHMS))
        )
    return distinguisher_classes[algorithm](config)(batch)


def symm_convex_distinguisher(batch: SampleBatch, config: TestConfig) -> TestReport:
    return SymmConvexDistinguisher(config)(batch)


def convex_distinguisher(batch: SampleBatch, config: TestConfig) -> TestReport:
    return ConvexDistinguisher(config)(batch)


def ltf_distinguisher(batch: SampleBatch, config: TestConfig) -> TestReport:
    return LtfDistinguisher(config)(batch)

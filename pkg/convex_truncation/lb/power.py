"""Detection rate of a distinguisher at a fixed sample budget."""

from dataclasses import asdict, dataclass
import math
from typing import Any, Dict, Optional, Union

from typeguard import typechecked

from convex_truncation.bodies.bodies import ConvexBody
from convex_truncation.bodies.spec import TruncationSpec, as_spec
from convex_truncation.gauss.rng import RngStream
from convex_truncation.samplers.factory import SamplerPlan, sample_truncated
from convex_truncation.testers.calibration import budget_epsilon
from convex_truncation.testers.constants import DEFAULT_CONSTANTS
from convex_truncation.testers.distinguishers import TestConfig, get_distinguisher_classes
from convex_truncation.utils.parallel import map_trials


@dataclass(frozen=True)
class PowerEstimate:
    algorithm: str
    T: int
    eps: float
    rate: float
    stderr: float
    trials: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@typechecked
def empirical_power_at_budget(
    spec: Union[TruncationSpec, ConvexBody],
    algorithm: str,
    T: int,
    trials: int,
    rng: RngStream,
    eps: Optional[float] = None,
    workers: Optional[int] = 1,
    plan: Optional[SamplerPlan] = None,
    **constants,
) -> PowerEstimate:
    """Fraction of `trials` tests on T truncated samples whose verdict is "truncated".

    Without an explicit eps the distinguisher runs at the distance the budget resolves,
    budget_epsilon(algorithm, n, T), so the thresholds follow T and not a target distance.

    Args:
        spec: truncation spec or a single body
        algorithm: "symm", "convex" or "ltf"
        T: samples per test
        trials: number of tests, at least 100; trial i samples on rng.spawn(i)
        rng: master stream
        eps: distance parameter of the thresholds; budget-derived if None
        workers: threads across trials; never changes the result
        plan: sampling strategies for the spec; exact defaults if None
        constants: overrides of the TestConfig constants (c_sym, C_sample, ...)

    Returns:
        PowerEstimate with the detection rate and its binomial standard error

    """
    distinguisher_classes = get_distinguisher_classes()
    if algorithm not in distinguisher_classes:
        raise NotImplementedError(
            "unknown algorithm '%s'; choose from %s" % (algorithm, list(distinguisher_classes))
        )
    if trials < 100:
        raise ValueError("power estimates need at least 100 trials, got %i" % trials)
    spec = as_spec(spec)
    from_budget = eps is None
    if from_budget:
        eps = budget_epsilon(
            algorithm, spec.n, T, constants.get("C_sample", DEFAULT_CONSTANTS.C_sample)
        )
    config = TestConfig(n=spec.n, eps=eps, T=T, eps_from_budget=from_budget, **constants)
    distinguisher = distinguisher_classes[algorithm](config)
    if plan is None:
        plan = SamplerPlan(spec=spec)
    thresholds = distinguisher.compute_thresholds(T)

    def _trial(i: int, stream: RngStream) -> bool:
        batch = sample_truncated(spec, T, stream, plan=plan)
        return bool(distinguisher.decide(distinguisher.compute_statistics(batch), thresholds))

    rate = sum(map_trials(_trial, trials, rng, workers=workers)) / trials
    return PowerEstimate(
        algorithm=algorithm,
        T=T,
        eps=eps,
        rate=rate,
        stderr=math.sqrt(rate * (1.0 - rate) / trials),
        trials=trials,
    )

"""High-level sampling: strategy plans for truncation specs and block generation."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import torch
from torchtyping import TensorType
from typeguard import typechecked

from convex_truncation.bodies.bodies import ConvexBody, as_direction
from convex_truncation.bodies.spec import TruncationSpec, as_spec
from convex_truncation.bodies.volume import mc_volume
from convex_truncation.gauss.batch import SampleBatch
from convex_truncation.gauss.primitives import chunk_sizes, chunked, normalized_rows, unit_sphere
from convex_truncation.gauss.rng import RngStream
from convex_truncation.samplers.samplers import (
    Sampler,
    default_strategy,
    get_sampler_classes,
    project_out,
    truncated_chi2_radius,
)
from convex_truncation.utils.parallel import map_trials

DEFAULT_MAX_ATTEMPTS = 1000000


@dataclass
class SamplerPlan:
    """One sampling strategy per mixture component of a spec.

    Strategies left as None get the exact strategy for their body, falling back to
    rejection for general intersections.

    """

    spec: TruncationSpec
    strategies: Optional[List[Optional[str]]] = None
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    samplers: List[Sampler] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        bodies = self.spec.bodies
        if self.strategies is None:
            self.strategies = [None] * len(bodies)
        if len(self.strategies) != len(bodies):
            raise ValueError(
                "plan lists %i strategies for %i components" % (len(self.strategies), len(bodies))
            )
        sampler_classes = get_sampler_classes()
        self.samplers = []
        for i, (strategy, body) in enumerate(zip(self.strategies, bodies)):
            if strategy is None:
                strategy = default_strategy(body)
                self.strategies[i] = strategy
            if strategy not in sampler_classes:
                raise NotImplementedError(
                    "unknown sampling strategy '%s'; choose from %s"
                    % (strategy, list(sampler_classes))
                )
            self.samplers.append(sampler_classes[strategy](body, max_attempts=self.max_attempts))

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> Tuple[np.ndarray, np.ndarray]:
        """Rows of the mixture plus the component label of each row."""
        weights = np.asarray(self.spec.weights)
        if len(weights) == 1:
            labels = np.zeros(rows, dtype=np.int64)
        else:
            labels = gen.choice(len(weights), size=rows, p=weights / weights.sum())
        out = np.empty((rows, self.spec.n))
        for k, sampler in enumerate(self.samplers):
            idx = labels == k
            out[idx] = sampler(gen, int(idx.sum()))
        return out, labels


def sample_truncated(
    spec: Union[TruncationSpec, ConvexBody],
    T: int,
    rng: RngStream,
    plan: Optional[SamplerPlan] = None,
    workers: Optional[int] = 1,
    return_components: bool = False,
) -> Union[SampleBatch, Tuple[SampleBatch, TensorType["num_samples", torch.int64]]]:
    """T i.i.d. rows from Σ w_i N(0, I_n)|K_i.

    Args:
        spec: truncation spec, or a single body
        T: number of rows
        rng: stream owning the block; chunk j of the block uses rng.spawn(j)
        plan: strategy plan; built from the spec's default strategies if None
        workers: threads used across chunks; never changes the output
        return_components: also return the mixture component label of each row

    Returns:
        SampleBatch, or (SampleBatch, labels) when return_components is True

    """
    spec = as_spec(spec)
    if T < 1:
        raise ValueError("sample count T must be >= 1, got %i" % T)
    if plan is None:
        plan = SamplerPlan(spec=spec)
    elif plan.spec != spec:
        raise ValueError("sampler plan was built for a different spec")
    sizes = chunk_sizes(T)

    def _run_chunk(j: int, stream: RngStream) -> Tuple[np.ndarray, np.ndarray]:
        return plan.sample_chunk(stream.generator(), sizes[j])

    chunks = map_trials(_run_chunk, len(sizes), rng, workers=workers)
    data = np.concatenate([c[0] for c in chunks], axis=0)
    batch = SampleBatch(
        data=torch.from_numpy(data), master_seed=rng.master_seed, stream_index=rng.stream_index
    )
    if return_components:
        labels = torch.from_numpy(np.concatenate([c[1] for c in chunks]).astype(np.int64))
        return batch, labels
    return batch


@typechecked
def rejection_rate_probe(body: ConvexBody, trials: int, rng: RngStream) -> float:
    """Acceptance fraction of N(0, I_n) proposals; the same probe as mc_volume."""
    rate, _ = mc_volume(body, trials, rng)
    return rate


def sample_ball_hyperplane(
    R: float,
    n: int,
    T: int,
    rng: RngStream,
    v: Optional[TensorType["dim", torch.float64]] = None,
) -> SampleBatch:
    """Rows u * sqrt(y): u Haar on the unit sphere of v-perp, y ~ χ²(n-1) | [0, R].

    The hyperplane normal is drawn from rng.spawn(0) when not supplied; the rows come from
    the chunks of rng.spawn(1).

    """
    if not R > 0:
        raise ValueError("squared radius R must be positive, got %s" % R)
    if n < 2:
        raise ValueError("ball-hyperplane sampling needs n >= 2, got %i" % n)
    if T < 1:
        raise ValueError("sample count T must be >= 1, got %i" % T)
    if v is None:
        v = unit_sphere(n, rng.spawn(0))
    v = as_direction(v).numpy()
    if v.shape[0] != n:
        raise ValueError("normal has dimension %i, expected %i" % (v.shape[0], n))

    def _draw(gen: np.random.Generator, rows: int) -> np.ndarray:
        dirs = normalized_rows(project_out(gen.standard_normal((rows, n)), v), gen)
        return dirs * truncated_chi2_radius(gen, rows, n - 1, R)[:, None]

    data = chunked(T, rng.spawn(1), _draw)
    return SampleBatch(
        data=torch.from_numpy(data), master_seed=rng.master_seed, stream_index=rng.stream_index
    )

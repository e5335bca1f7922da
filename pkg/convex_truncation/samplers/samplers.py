"""Samplers for N(0, I_n) restricted to one body.

Each strategy is its own class; an initialized sampler stores the body it draws from and
any strategy parameters (rejection cap, ...). The general flow of a sampler is:
- input: a numpy generator owned by one chunk of rows, and the number of rows
- step 0: draw the free Gaussian part
- step 1: draw the constrained part (truncated coordinate, radius, cell, or accept/reject)
- step 2: return a (rows, n) float64 array

A separate SamplerPlan (defined in convex_truncation.samplers.factory) assigns a strategy
to every component of a TruncationSpec and orchestrates chunking and mixture labels.

"""

import math
from typing import Dict, Type
import warnings

import numpy as np

from convex_truncation.bodies.bodies import (
    Ball,
    ConvexBody,
    GridUnion,
    Halfspace,
    Hyperplane,
    Intersection,
    Slab,
)
from convex_truncation.errors import RejectionExhausted
from convex_truncation.gauss.primitives import normalized_rows, truncated_normal_from_uniform
from convex_truncation.gauss.special import chi2_cdf, chi2_quantile, norm_ppf

# proposals per rejection round are capped at this many floats
_MAX_PROPOSAL_FLOATS = 1 << 23


def project_out(g: np.ndarray, v: np.ndarray) -> np.ndarray:
    """g - (g.v) v row-wise."""
    return g - np.outer(g @ v, v)


def truncated_chi2_radius(
    gen: np.random.Generator, rows: int, k: int, R: float
) -> np.ndarray:
    """sqrt(y) with y ~ χ²(k) conditioned on [0, R], by inverse CDF bisection."""
    mass = float(chi2_cdf(R, k))
    u = gen.random(rows)
    y = chi2_quantile(u * mass, k, upper=R)
    return np.sqrt(y)


class Sampler:
    """Parent class for all sampling strategies."""

    strategy = "base"
    # body classes the strategy is valid for; None means any body
    valid_bodies = None

    def __init__(self, body: ConvexBody, **kwargs) -> None:
        if self.valid_bodies is not None and not isinstance(body, self.valid_bodies):
            raise ValueError(
                "strategy '%s' cannot sample a %s body" % (self.strategy, body.variant)
            )
        self.body = body
        self.n = body.n

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        if rows == 0:
            return np.zeros((0, self.n))
        return self.sample_chunk(gen, rows)

    def __repr__(self) -> str:
        return "%s(%r)" % (type(self).__name__, self.body)


class ExactAxisSampler(Sampler):
    """Halfspace and slab: free Gaussian in v-perp plus a 1-d truncated normal along v."""

    strategy = "exact_axis"
    valid_bodies = (Halfspace, Slab)

    def __init__(self, body: ConvexBody, **kwargs) -> None:
        super().__init__(body)
        self.v = body.v.numpy()
        if isinstance(body, Halfspace):
            self.lo, self.hi = body.b, math.inf
        else:
            self.lo, self.hi = -body.r, body.r

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        g = gen.standard_normal((rows, self.n))
        t = truncated_normal_from_uniform(self.lo, self.hi, gen.random(rows))
        return project_out(g, self.v) + np.outer(t, self.v)


class ExactRadialSampler(Sampler):
    """Ball: Haar direction times the radial law sqrt(χ²(n) | [0, r²])."""

    strategy = "exact_radial"
    valid_bodies = (Ball,)

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        dirs = normalized_rows(gen.standard_normal((rows, self.n)), gen)
        radius = truncated_chi2_radius(gen, rows, self.n, self.body.r ** 2)
        return dirs * radius[:, None]


class SubspaceSampler(Sampler):
    """Hyperplane: N(0, I_n) with the v component removed, i.e. N(0, I_{n-1}) on v-perp."""

    strategy = "subspace"
    valid_bodies = (Hyperplane,)

    def __init__(self, body: ConvexBody, **kwargs) -> None:
        super().__init__(body)
        self.v = body.v.numpy()

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        return project_out(gen.standard_normal((rows, self.n)), self.v)


class ExactCellSampler(Sampler):
    """GridUnion: uniform kept cell, then per-axis inverse CDF inside its quantile box."""

    strategy = "exact_cell"
    valid_bodies = (GridUnion,)

    def __init__(self, body: ConvexBody, **kwargs) -> None:
        super().__init__(body)
        if body.kept.size == 0:
            raise ValueError("grid union has no kept cells")
        self.bins = np.asarray(body.bins, dtype=float)

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        cells = self.body.kept[gen.integers(self.body.kept.size, size=rows)]
        digits = self.body.cell_digits(cells)
        u = gen.random((rows, self.n))
        p = np.maximum((digits + u) / self.bins[None, :], np.finfo(float).tiny)
        return norm_ppf(p)


class RejectionSampler(Sampler):
    """Propose N(0, I_n), keep points inside the body.

    Gives up with RejectionExhausted once a chunk has used max_attempts proposals per
    requested row.

    """

    strategy = "rejection"

    def __init__(self, body: ConvexBody, max_attempts: int = 1000000, **kwargs) -> None:
        super().__init__(body)
        if isinstance(body, Hyperplane):
            raise ValueError("rejection cannot sample a measure-zero hyperplane; use 'subspace'")
        self.max_attempts = int(max_attempts)
        vol = body.exact_volume()
        if vol is not None and vol <= 0:
            raise ValueError("rejection cannot sample a body of volume 0: %r" % body)
        if vol is not None:
            required = int(math.ceil(20.0 / vol))
            if self.max_attempts < required:
                warnings.warn(
                    "raising rejection cap for %r from %i to %i (= ceil(20 / vol))"
                    % (body, self.max_attempts, required)
                )
                self.max_attempts = required
        self.volume_hint = vol

    def sample_chunk(self, gen: np.random.Generator, rows: int) -> np.ndarray:
        cap = self.max_attempts * rows
        accepted = []
        n_accepted = 0
        attempts = 0
        rate = self.volume_hint if self.volume_hint else 0.5
        max_block = max(1024, _MAX_PROPOSAL_FLOATS // self.n)
        while n_accepted < rows:
            if attempts >= cap:
                raise RejectionExhausted(body=self.body, attempts=attempts)
            need = rows - n_accepted
            block = int(min(max_block, cap - attempts, max(64, math.ceil(1.2 * need / rate))))
            g = gen.standard_normal((block, self.n))
            attempts += block
            keep = g[self.body.contains(g).numpy()]
            accepted.append(keep[:need])
            n_accepted += min(len(keep), need)
            # update the acceptance estimate from what we have seen
            rate = max(n_accepted / attempts, 1.0 / max(self.max_attempts, 1))
        return np.concatenate(accepted, axis=0)


def get_sampler_classes() -> Dict[str, Type[Sampler]]:
    sampler_dict = {
        "exact_axis": ExactAxisSampler,
        "exact_radial": ExactRadialSampler,
        "subspace": SubspaceSampler,
        "exact_cell": ExactCellSampler,
        "rejection": RejectionSampler,
    }
    return sampler_dict


def default_strategy(body: ConvexBody) -> str:
    if isinstance(body, (Halfspace, Slab)):
        return "exact_axis"
    elif isinstance(body, Ball):
        return "exact_radial"
    elif isinstance(body, Hyperplane):
        return "subspace"
    elif isinstance(body, GridUnion):
        return "exact_cell"
    elif isinstance(body, Intersection):
        return "rejection"
    else:
        raise NotImplementedError("no sampling strategy for body %r" % body)

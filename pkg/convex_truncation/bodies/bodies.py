"""Truncation sets as structured bodies.

Each variant is its own class; an initialized body stores its parameters (direction,
offset, radius, ...) and knows its dimension, its membership predicate, whether it is
symmetric about the origin and, where one exists, its closed-form Gaussian volume.

Bodies are immutable after construction and are safe to share across threads.

"""

import math
from typing import Any, Dict, List, Optional, Sequence, Type, Union

import numpy as np
from scipy import special
import torch
from torchtyping import TensorType
from typeguard import typechecked

from convex_truncation.errors import DimensionMismatch
from convex_truncation.gauss import TOLERANCES
from convex_truncation.gauss.rng import RngStream
from convex_truncation.gauss.special import chi2_cdf, chi2_quantile, norm_ppf

Points = Union[TensorType["num_samples", "dim", torch.float64], TensorType["dim", torch.float64]]


def as_direction(v: Any) -> TensorType["dim", torch.float64]:
    """Convert to a float64 vector and check it is unit-norm within 1e-12."""
    v = torch.as_tensor(np.asarray(v, dtype=np.float64), dtype=torch.float64).flatten()
    if v.numel() < 1:
        raise ValueError("direction must have at least one coordinate")
    norm = float(torch.linalg.norm(v))
    if abs(norm - 1.0) > TOLERANCES.unit_norm:
        raise ValueError("direction must be unit-norm, got norm %.16g" % norm)
    return v


def axis(n: int, i: int = 0) -> TensorType["dim", torch.float64]:
    e = torch.zeros(n, dtype=torch.float64)
    e[i] = 1.0
    return e


class ConvexBody:
    """Parent class for all truncation sets."""

    variant = "base"

    def __init__(self, n: int) -> None:
        if int(n) < 1:
            raise ValueError("body dimension must be >= 1, got %i" % n)
        self.n = int(n)

    def _points(self, x: Any) -> torch.Tensor:
        x = torch.as_tensor(x, dtype=torch.float64)
        if x.shape[-1] != self.n:
            raise DimensionMismatch(
                "%s lives in dimension %i but got points of dimension %i"
                % (self.variant, self.n, x.shape[-1])
            )
        return x

    def contains(self, x: Points) -> Union[bool, TensorType["num_samples", torch.bool]]:
        """Membership of one point (returns bool) or of each row of a block."""
        x = self._points(x)
        if x.ndim == 1:
            return bool(self._contains(x.unsqueeze(0))[0])
        return self._contains(x)

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def exact_volume(self) -> Optional[float]:
        return None

    @property
    def is_symmetric(self) -> bool:
        return False

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "n": self.n}

    def __repr__(self) -> str:
        params = {k: v for k, v in self.to_dict().items() if k not in ("variant", "v", "kept")}
        return "%s(%s)" % (
            type(self).__name__, ", ".join("%s=%s" % (k, v) for k, v in params.items())
        )


class Halfspace(ConvexBody):
    """{x : v.x >= b}."""

    variant = "halfspace"

    def __init__(self, v: Any, b: float = 0.0) -> None:
        self.v = as_direction(v)
        super().__init__(self.v.numel())
        self.b = float(b)
        if not math.isfinite(self.b):
            raise ValueError("halfspace offset must be finite, got %s" % b)

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        return x @ self.v >= self.b

    def exact_volume(self) -> float:
        return float(special.ndtr(-self.b))

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "n": self.n, "v": self.v.tolist(), "b": self.b}


class Slab(ConvexBody):
    """{x : |v.x| <= r}."""

    variant = "slab"

    def __init__(self, v: Any, r: float) -> None:
        self.v = as_direction(v)
        super().__init__(self.v.numel())
        self.r = float(r)
        if not self.r > 0:
            raise ValueError("slab half-width must be positive, got %s" % r)

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        return (x @ self.v).abs() <= self.r

    def exact_volume(self) -> float:
        return float(special.erf(self.r / math.sqrt(2.0)))

    @property
    def is_symmetric(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "n": self.n, "v": self.v.tolist(), "r": self.r}


class Ball(ConvexBody):
    """Origin-centered ball {x : |x|^2 <= r^2}."""

    variant = "ball"

    def __init__(self, n: int, r: float) -> None:
        super().__init__(n)
        self.r = float(r)
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError("ball radius must be positive and finite, got %s" % r)

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        return (x * x).sum(dim=-1) <= self.r ** 2

    def exact_volume(self) -> float:
        return float(chi2_cdf(self.r ** 2, self.n))

    @property
    def is_symmetric(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "n": self.n, "r": self.r}


class Hyperplane(ConvexBody):
    """Origin hyperplane v-perp; membership up to |v.x| <= TOLERANCES.hyperplane."""

    variant = "hyperplane"

    def __init__(self, v: Any) -> None:
        self.v = as_direction(v)
        super().__init__(self.v.numel())

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        return (x @ self.v).abs() <= TOLERANCES.hyperplane

    def exact_volume(self) -> float:
        return 0.0

    @property
    def is_symmetric(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "n": self.n, "v": self.v.tolist()}


class Intersection(ConvexBody):

    variant = "intersection"

    def __init__(self, members: Sequence[ConvexBody]) -> None:
        members = list(members)
        if len(members) == 0:
            raise ValueError("intersection needs at least one member")
        dims = set(m.n for m in members)
        if len(dims) != 1:
            raise DimensionMismatch("intersection members have dimensions %s" % sorted(dims))
        if any(isinstance(m, GridUnion) for m in members):
            raise ValueError("grid unions are not convex and cannot be intersected")
        super().__init__(members[0].n)
        self.members = members

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        inside = torch.ones(x.shape[0], dtype=torch.bool)
        for member in self.members:
            inside &= member._contains(x)
        return inside

    def exact_volume(self) -> Optional[float]:
        # no closed form in general; a single member is just that member
        if len(self.members) == 1:
            return self.members[0].exact_volume()
        if any(isinstance(m, Hyperplane) for m in self.members):
            return 0.0
        return None

    @property
    def is_symmetric(self) -> bool:
        return all(m.is_symmetric for m in self.members)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "n": self.n,
            "members": [m.to_dict() for m in self.members],
        }


class GridUnion(ConvexBody):
    """Union of kept cells of a Gaussian-quantile grid with M equal-volume cells.

    Axis i is split into bins[i] intervals of equal N(0,1) mass; a cell is a product of
    one interval per axis and is identified by its mixed-radix index (axis 0 most
    significant). Not convex.

    """

    variant = "grid_union"

    def __init__(self, n: int, bins: Sequence[int], kept: Any) -> None:
        super().__init__(n)
        self.bins = [int(m) for m in bins]
        if len(self.bins) != self.n or any(m < 1 for m in self.bins):
            raise ValueError("grid needs one positive bin count per axis, got %s" % bins)
        self.M = int(np.prod(self.bins, dtype=np.int64))
        kept = np.unique(np.asarray(kept, dtype=np.int64))
        if kept.size > self.M or (kept.size and (kept[0] < 0 or kept[-1] >= self.M)):
            raise ValueError("kept cells must be distinct indices in [0, %i)" % self.M)
        self.kept = kept
        # row-major strides: axis 0 most significant
        strides = np.ones(self.n, dtype=np.int64)
        for i in range(self.n - 2, -1, -1):
            strides[i] = strides[i + 1] * self.bins[i + 1]
        self.strides = strides

    def cell_index(self, x: Points) -> np.ndarray:
        """Mixed-radix cell index of each row; every point lands in exactly one cell."""
        x = self._points(x)
        x = x.reshape(-1, self.n).numpy()
        m = np.asarray(self.bins, dtype=np.int64)
        j = np.floor(special.ndtr(x) * m).astype(np.int64)
        j = np.clip(j, 0, m - 1)
        return j @ self.strides

    def cell_digits(self, index: np.ndarray) -> np.ndarray:
        """Inverse of the mixed-radix encoding, shape (len(index), n)."""
        index = np.asarray(index, dtype=np.int64)
        return (index[:, None] // self.strides[None, :]) % np.asarray(self.bins)[None, :]

    def _contains(self, x: torch.Tensor) -> torch.Tensor:
        return torch.from_numpy(np.isin(self.cell_index(x), self.kept))

    def exact_volume(self) -> float:
        return self.kept.size / self.M

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "n": self.n,
            "M": self.M,
            "bins": list(self.bins),
            "kept": self.kept.tolist(),
        }


def get_body_classes() -> Dict[str, Type[ConvexBody]]:
    body_dict = {
        "halfspace": Halfspace,
        "slab": Slab,
        "ball": Ball,
        "hyperplane": Hyperplane,
        "intersection": Intersection,
        "grid_union": GridUnion,
    }
    return body_dict


def grid_bins(n: int, M: int) -> List[int]:
    """m bins per axis when M = m^n exactly, otherwise all M bins on the first axis."""
    m = int(round(M ** (1.0 / n)))
    for candidate in (m - 1, m, m + 1):
        if candidate >= 1 and candidate ** n == M:
            return [candidate] * n
    return [M] + [1] * (n - 1)


@typechecked
def grid_union_random(n: int, M: int, keep_fraction: float, rng: RngStream) -> GridUnion:
    """GridUnion keeping floor(keep_fraction * M) cells chosen uniformly at random.

    Args:
        n: dimension
        M: total number of equal-volume cells
        keep_fraction: 1 - eps, in (0, 1]
        rng: stream used to choose the kept cells

    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError("keep_fraction must lie in (0, 1], got %s" % keep_fraction)
    if M < 1 or M * keep_fraction < 1.0 - 1e-12:
        raise ValueError(
            "need M >= 1/keep_fraction to keep at least one cell, got M=%i, keep_fraction=%s"
            % (M, keep_fraction)
        )
    n_kept = int(math.floor(keep_fraction * M + 1e-9))
    bins = grid_bins(n, M)
    if n_kept == M:
        kept = np.arange(M, dtype=np.int64)
    else:
        kept = rng.generator().choice(M, size=n_kept, replace=False)
    return GridUnion(n=n, bins=bins, kept=kept)


def slab_for_volume(v: Any, vol: float) -> Slab:
    """Slab along v with Gaussian volume vol, r = Φ⁻¹((1 + vol)/2)."""
    if not 0.0 < vol < 1.0:
        raise ValueError("slab volume must lie in (0, 1), got %s" % vol)
    return Slab(v=v, r=float(norm_ppf(0.5 * (1.0 + vol))))


def ball_for_volume(n: int, vol: float) -> Ball:
    """Ball whose squared radius is the vol-quantile of χ²(n)."""
    if not 0.0 < vol < 1.0:
        raise ValueError("ball volume must lie in (0, 1), got %s" % vol)
    return Ball(n=n, r=math.sqrt(float(chi2_quantile(vol, n))))


def halfspace_for_volume(v: Any, vol: float) -> Halfspace:
    if not 0.0 < vol < 1.0:
        raise ValueError("halfspace volume must lie in (0, 1), got %s" % vol)
    return Halfspace(v=v, b=float(norm_ppf(1.0 - vol)))

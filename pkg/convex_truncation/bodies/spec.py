"""Truncation specs (weighted mixtures of bodies) and their JSON form."""

from dataclasses import dataclass
import json
import os
from typing import Any, Dict, List, Optional, Tuple, Union

import jsonschema
import torch
from torchtyping import TensorType

from convex_truncation.bodies.bodies import ConvexBody, Points, get_body_classes
from convex_truncation.errors import DimensionMismatch, SpecParse
from convex_truncation.utils.io import load_schema


@dataclass(frozen=True)
class TruncationSpec:
    """Mixture Σ w_i N(0, I_n)|K_i; a single component with weight 1 is a plain truncation."""

    components: Tuple[Tuple[float, ConvexBody], ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), body) for w, body in self.components)
        if len(comps) == 0:
            raise ValueError("truncation spec needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("mixture weights must be non-negative")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1, got %.16g" % total)
        dims = set(body.n for _, body in comps)
        if len(dims) != 1:
            raise DimensionMismatch("mixture components have dimensions %s" % sorted(dims))
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, body: ConvexBody) -> "TruncationSpec":
        return cls(components=((1.0, body),))

    @classmethod
    def mixture(cls, weights: List[float], bodies: List[ConvexBody]) -> "TruncationSpec":
        if len(weights) != len(bodies):
            raise ValueError("got %i weights for %i bodies" % (len(weights), len(bodies)))
        return cls(components=tuple(zip(weights, bodies)))

    @property
    def n(self) -> int:
        return self.components[0][1].n

    @property
    def weights(self) -> List[float]:
        return [w for w, _ in self.components]

    @property
    def bodies(self) -> List[ConvexBody]:
        return [body for _, body in self.components]

    @property
    def is_symmetric(self) -> bool:
        return all(body.is_symmetric for body in self.bodies)

    def exact_volume(self) -> Optional[float]:
        """Weighted volume Σ w_i vol(K_i) when every component has a closed form."""
        vols = [body.exact_volume() for body in self.bodies]
        if any(v is None for v in vols):
            return None
        return sum(w * v for w, v in zip(self.weights, vols))

    def indicator(self, x: Points) -> TensorType["num_samples", torch.float64]:
        """Σ w_i 1_{K_i}(x) for each row, the [0, 1]-valued weight of a mixture."""
        x = torch.as_tensor(x, dtype=torch.float64)
        if x.ndim == 1:
            x = x.unsqueeze(0)
        out = torch.zeros(x.shape[0], dtype=torch.float64)
        for w, body in self.components:
            out += w * body.contains(x).to(torch.float64)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"components": [{"weight": w, "body": b.to_dict()} for w, b in self.components]}


def as_spec(target: Union[TruncationSpec, ConvexBody]) -> TruncationSpec:
    """Wrap a bare body as a single-component spec."""
    if isinstance(target, ConvexBody):
        return TruncationSpec.single(target)
    return target


def body_from_dict(d: Dict[str, Any]) -> ConvexBody:
    """Build a body from its JSON description, e.g. {"variant": "slab", "n": 3, ...}."""
    try:
        jsonschema.validate(d, load_schema("body"))
    except jsonschema.ValidationError as e:
        raise SpecParse("invalid body description: %s" % e.message)
    variant = d["variant"]
    body_classes = get_body_classes()
    if variant not in body_classes:
        raise SpecParse("unknown body variant '%s'; choose from %s" % (variant, list(body_classes)))
    try:
        if variant == "halfspace":
            body = body_classes[variant](v=d["v"], b=d.get("b", 0.0))
        elif variant == "slab":
            body = body_classes[variant](v=d["v"], r=d["r"])
        elif variant == "ball":
            body = body_classes[variant](n=d["n"], r=d["r"])
        elif variant == "hyperplane":
            body = body_classes[variant](v=d["v"])
        elif variant == "intersection":
            body = body_classes[variant](members=[body_from_dict(m) for m in d["members"]])
        else:
            body = body_classes[variant](n=d["n"], bins=d["bins"], kept=d["kept"])
    except (KeyError, ValueError) as e:
        raise SpecParse("could not build %s body: %s" % (variant, e))
    if body.n != d["n"]:
        raise SpecParse("%s body declares n=%i but its parameters give n=%i" % (variant, d["n"], body.n))
    return body


def spec_from_dict(d: Dict[str, Any]) -> TruncationSpec:
    """Accepts either a bare body description or {"components": [{"weight", "body"}, ...]}."""
    if "components" not in d:
        return TruncationSpec.single(body_from_dict(d))
    try:
        jsonschema.validate(d, load_schema("truncation_spec"))
    except jsonschema.ValidationError as e:
        raise SpecParse("invalid truncation spec: %s" % e.message)
    bodies = [body_from_dict(c["body"]) for c in d["components"]]
    try:
        return TruncationSpec.mixture([c["weight"] for c in d["components"]], bodies)
    except ValueError as e:
        raise SpecParse(str(e))


def load_spec(path: str) -> TruncationSpec:
    if not os.path.isfile(path):
        raise FileNotFoundError("spec file %s does not exist" % path)
    with open(path, "r") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise SpecParse("%s is not valid JSON: %s" % (path, e))
    return spec_from_dict(d)


def save_spec(spec: Union[TruncationSpec, ConvexBody], path: str) -> None:
    with open(path, "w") as f:
        json.dump(spec.to_dict(), f, indent=2)

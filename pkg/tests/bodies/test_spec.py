"""Test truncation specs and their JSON descriptions."""

import json
import os

import pytest
import torch


def test_spec_validation():

    from convex_truncation.bodies.bodies import Ball, Slab, axis
    from convex_truncation.bodies.spec import TruncationSpec
    from convex_truncation.errors import DimensionMismatch

    spec = TruncationSpec.mixture([0.25, 0.75], [Slab(axis(3), 1.0), Ball(3, 2.0)])
    assert spec.n == 3
    assert spec.weights == [0.25, 0.75]
    assert spec.is_symmetric

    with pytest.raises(ValueError):
        TruncationSpec.mixture([0.5, 0.6], [Slab(axis(3), 1.0), Ball(3, 2.0)])
    with pytest.raises(ValueError):
        TruncationSpec.mixture([1.5, -0.5], [Slab(axis(3), 1.0), Ball(3, 2.0)])
    with pytest.raises(ValueError):
        TruncationSpec(components=())
    with pytest.raises(DimensionMismatch):
        TruncationSpec.mixture([0.5, 0.5], [Slab(axis(3), 1.0), Ball(4, 2.0)])


def test_spec_volume_and_indicator():

    from convex_truncation.bodies.bodies import Halfspace, Intersection, Slab, axis
    from convex_truncation.bodies.spec import TruncationSpec, as_spec

    half = Halfspace(axis(2), 0.0)
    spec = TruncationSpec.mixture([0.5, 0.5], [half, Slab(axis(2, 1), 1.0)])
    assert abs(spec.exact_volume() - 0.5 * (0.5 + Slab(axis(2, 1), 1.0).exact_volume())) < 1e-15

    x = torch.tensor([[1.0, 0.0], [-1.0, 0.0], [1.0, 2.0], [-1.0, 2.0]], dtype=torch.float64)
    assert spec.indicator(x).tolist() == [1.0, 0.5, 0.5, 0.0]

    general = as_spec(Intersection([half, Slab(axis(2, 1), 1.0)]))
    assert general.exact_volume() is None
    assert as_spec(general) is general


def test_body_dicts():

    from convex_truncation.bodies.bodies import (
        Ball,
        Halfspace,
        Hyperplane,
        Intersection,
        Slab,
        axis,
        grid_union_random,
    )
    from convex_truncation.bodies.spec import body_from_dict
    from convex_truncation.gauss.rng import RngStream

    bodies = [
        Halfspace(axis(3), 0.25),
        Slab(axis(3, 2), 0.6744897501960817),
        Ball(3, 1.7),
        Hyperplane(axis(3, 1)),
        Intersection([Slab(axis(3), 1.0), Ball(3, 2.0)]),
        grid_union_random(3, 27, 0.5, RngStream(3, 0)),
    ]
    probe = torch.randn(500, 3, dtype=torch.float64, generator=torch.Generator().manual_seed(0))
    for body in bodies:
        rebuilt = body_from_dict(json.loads(json.dumps(body.to_dict())))
        assert type(rebuilt) is type(body)
        assert rebuilt.to_dict() == body.to_dict()
        assert torch.equal(rebuilt.contains(probe), body.contains(probe))


def test_body_dict_errors():

    from convex_truncation.bodies.spec import body_from_dict
    from convex_truncation.errors import SpecParse

    # unknown variant is rejected by the schema
    with pytest.raises(SpecParse):
        body_from_dict({"variant": "simplex", "n": 3})
    # slab without half-width
    with pytest.raises(SpecParse):
        body_from_dict({"variant": "slab", "n": 2, "v": [1.0, 0.0]})
    # declared n disagrees with the direction
    with pytest.raises(SpecParse):
        body_from_dict({"variant": "halfspace", "n": 3, "v": [1.0, 0.0], "b": 0.0})
    # not unit norm
    with pytest.raises(SpecParse):
        body_from_dict({"variant": "hyperplane", "n": 2, "v": [1.0, 1.0]})


def test_spec_files(tmpdir, spec_dir):

    from convex_truncation.bodies.bodies import Ball, Slab, axis
    from convex_truncation.bodies.spec import TruncationSpec, load_spec, save_spec
    from convex_truncation.errors import SpecParse

    spec = TruncationSpec.mixture([0.3, 0.7], [Slab(axis(4), 0.5), Ball(4, 2.0)])
    path = os.path.join(tmpdir, "spec.json")
    save_spec(spec, path)
    loaded = load_spec(path)
    assert loaded.to_dict() == spec.to_dict()

    # the shipped specs parse
    ball = load_spec(os.path.join(spec_dir, "ball_half.json"))
    assert abs(ball.exact_volume() - 0.5) < 1e-5
    slab = load_spec(os.path.join(spec_dir, "slab_half.json"))
    assert abs(slab.exact_volume() - 0.5) < 1e-12
    mix = load_spec(os.path.join(spec_dir, "slab_ball_mixture.json"))
    assert mix.weights == [0.5, 0.5]
    assert mix.is_symmetric

    with open(path, "w") as f:
        f.write("{not json")
    with pytest.raises(SpecParse):
        load_spec(path)
    with pytest.raises(FileNotFoundError):
        load_spec(os.path.join(tmpdir, "missing.json"))

    with open(path, "w") as f:
        json.dump({"components": [{"weight": 0.5, "body": {"variant": "ball", "n": 2, "r": 1.0}}]}, f)
    with pytest.raises(SpecParse):
        load_spec(path)


def test_spec_files_zero_weight(tmpdir):

    from convex_truncation.bodies.bodies import Halfspace, axis
    from convex_truncation.bodies.spec import TruncationSpec, load_spec, save_spec

    # a component may carry weight 0
    spec = TruncationSpec.mixture([0.0, 1.0], [Halfspace(axis(3), 0.0), Halfspace(axis(3), 0.5)])
    path = os.path.join(tmpdir, "zero_weight.json")
    save_spec(spec, path)
    loaded = load_spec(path)
    assert loaded.weights == [0.0, 1.0]
    assert loaded.to_dict() == spec.to_dict()
    assert loaded.exact_volume() == spec.exact_volume()

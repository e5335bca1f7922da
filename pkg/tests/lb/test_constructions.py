"""Test the typicality probe and the grid birthday demo."""

import math

import numpy as np
import pytest


def test_typicality_window():

    from convex_truncation.lb.constructions import typicality_window

    assert abs(typicality_window(400, 3.0) - 3.0 * math.sqrt(math.log(400) / 400)) < 1e-15


def test_tuple_is_atypical_examples():

    from convex_truncation.lb.constructions import tuple_is_atypical

    n = 100
    # orthogonal rows of norm sqrt(n) are typical
    G = np.zeros((3, n))
    for i in range(3):
        G[i, i] = math.sqrt(n)
    assert not tuple_is_atypical(G, 3.0)

    # repeated row violates the pairwise window
    assert tuple_is_atypical(np.vstack([G[0], G[0]]), 3.0)
    # norm far from sqrt(n) violates the norm window only when norms are checked
    short = G.copy()
    short[0] *= 0.1
    assert tuple_is_atypical(short, 3.0)
    assert not tuple_is_atypical(short, 3.0, check_norms=False)


def test_slab_typicality_probe(rng):

    from convex_truncation.lb.constructions import slab_lb_typicality_probe

    n = 400
    m = math.ceil(math.sqrt(n) / math.log(n))
    assert slab_lb_typicality_probe(n, m, 1000, rng, C1=3.0, workers=4) <= 0.05

    # a single vector is only checked against the norm window
    assert slab_lb_typicality_probe(n, 1, 200, rng) == 0.0
    assert slab_lb_typicality_probe(n, 1, 200, rng, C1=1e-9) == 1.0
    assert slab_lb_typicality_probe(n, m, 200, rng, C1=1e-9) == 1.0

    with pytest.raises(ValueError):
        slab_lb_typicality_probe(10, 11, 10, rng)


def test_grid_birthday_single_point(rng):

    from convex_truncation.lb.constructions import grid_birthday_demo

    result = grid_birthday_demo(2, 100, 0.5, 1, 20, rng)
    assert result.distinct_frequency == 1.0
    assert result.birthday_bound == 1.0 - 1.0 / 50.0


def test_grid_birthday_demo(rng):

    from convex_truncation.lb.constructions import grid_birthday_demo

    result = grid_birthday_demo(2, 1000000, 0.5, 100, 1000, rng, workers=4)
    assert abs(result.birthday_bound - 0.98) < 1e-12
    assert result.distinct_frequency >= 0.97
    # given distinct cells the points are exact N(0, I_2) samples
    assert abs(result.mean_M_distinct - 2.0) < 4 * result.stderr_M_distinct


def test_grid_birthday_collisions(rng):

    from convex_truncation.lb.constructions import grid_birthday_demo

    # at N² = (1 - eps) M collisions are frequent
    result = grid_birthday_demo(1, 200, 0.5, 10, 300, rng)
    assert result.birthday_bound == 0.0
    assert result.distinct_frequency < 0.9


def test_grid_birthday_validation(rng):

    from convex_truncation.lb.constructions import grid_birthday_demo

    with pytest.raises(ValueError):
        grid_birthday_demo(2, 100, 0.5, 8, 10, rng)
    with pytest.raises(ValueError):
        grid_birthday_demo(2, 100, 1.0, 1, 10, rng)
    with pytest.raises(ValueError):
        grid_birthday_demo(2, 100, 0.5, 0, 10, rng)

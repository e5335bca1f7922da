"""Provide pytest fixtures for the entire test suite.

These fixtures create configs, random streams and bodies that can be reused by other
tests. The config is the one the experiment script runs with, loaded without hydra.

"""

import os

from omegaconf import OmegaConf
import pytest
import yaml

from convex_truncation.bodies.bodies import (
    Ball,
    Halfspace,
    Hyperplane,
    Slab,
    axis,
    ball_for_volume,
    slab_for_volume,
)
from convex_truncation.gauss.rng import RngStream

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SPEC_DIR = os.path.join(BASE_DIR, "scripts", "specs")

# seed shared by all statistical tests; changing it re-rolls every Monte Carlo check
TEST_SEED = 20231016


@pytest.fixture
def cfg() -> dict:
    """Load the default experiment config file without hydra."""
    config_file = os.path.join(BASE_DIR, "scripts", "configs", "config_default.yaml")
    cfg = yaml.load(open(config_file), Loader=yaml.FullLoader)
    cfg["seed"] = TEST_SEED
    return OmegaConf.create(cfg)


@pytest.fixture
def spec_dir() -> str:
    return SPEC_DIR


@pytest.fixture
def rng() -> RngStream:
    return RngStream(TEST_SEED, 0)


@pytest.fixture
def halfspace_10() -> Halfspace:
    """Halfspace {x_1 >= 0} in 10 dimensions, volume 1/2."""
    return Halfspace(axis(10), b=0.0)


@pytest.fixture
def slab_10() -> Slab:
    """Slab of volume 1/2 along the first axis, n=10."""
    return slab_for_volume(axis(10), 0.5)


@pytest.fixture
def ball_10() -> Ball:
    """Ball at the χ²(10) median radius, volume 1/2."""
    return ball_for_volume(10, 0.5)


@pytest.fixture
def hyperplane_10() -> Hyperplane:
    return Hyperplane(axis(10))

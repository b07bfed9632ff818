"""Shared fixtures."""

from pathlib import Path

import numpy as np
import pytest

from revlab.bounds import GoodPair
from revlab.config import FIXTURES_FOLDER
from revlab.distributions import FiniteAtoms, PiecewiseUniform, Uniform
from revlab.optrev import FiniteJoint


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_FOLDER


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def two_point() -> FiniteAtoms:
    return FiniteAtoms([1.0, 2.0], [0.5, 0.5])


@pytest.fixture
def iid_two_point(two_point) -> FiniteJoint:
    """iid uniform on {1, 2}^2."""
    return FiniteJoint.product(two_point, two_point)


@pytest.fixture
def uniform_pair() -> GoodPair:
    return GoodPair.from_dists(Uniform(0.0, 1.0), Uniform(0.0, 1.0))


@pytest.fixture
def irregular_pair() -> GoodPair:
    return GoodPair.from_dists(
        Uniform(0.0, 1.0),
        PiecewiseUniform([0.0, 0.5, 0.6, 3.0], [0.2, 6.0, 0.125]),
    )

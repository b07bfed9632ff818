"""Hypothesis strategies for small finite instances."""

import numpy as np
from hypothesis import strategies as st

from revlab.continuity import DiscreteMeasureKD
from revlab.distributions import FiniteAtoms
from revlab.mechanisms import MenuMechanism
from revlab.optrev import FiniteJoint

values = st.floats(min_value=0.0, max_value=4.0, allow_nan=False).map(lambda v: round(v, 3))
weights = st.integers(min_value=1, max_value=9)


@st.composite
def finite_atoms(draw, max_size: int = 4) -> FiniteAtoms:
    k = draw(st.integers(min_value=1, max_value=max_size))
    vals = draw(st.lists(values, min_size=k, max_size=k))
    w = np.array(draw(st.lists(weights, min_size=k, max_size=k)), dtype=float)
    return FiniteAtoms(vals, w / w.sum())


@st.composite
def independent_joints(draw, max_size: int = 3) -> FiniteJoint:
    return FiniteJoint.product(draw(finite_atoms(max_size)), draw(finite_atoms(max_size)))


@st.composite
def joints(draw, max_points: int = 5) -> FiniteJoint:
    k = draw(st.integers(min_value=1, max_value=max_points))
    pts = draw(st.lists(st.tuples(values, values), min_size=k, max_size=k))
    w = np.array(draw(st.lists(weights, min_size=k, max_size=k)), dtype=float)
    return FiniteJoint.from_points(np.array(pts, dtype=float), w / w.sum())


@st.composite
def menus(draw, max_entries: int = 4) -> MenuMechanism:
    k = draw(st.integers(min_value=1, max_value=max_entries))
    unit = st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0])
    price = st.floats(min_value=0.0, max_value=5.0, allow_nan=False).map(lambda v: round(v, 2))
    rows = draw(st.lists(st.tuples(unit, unit, price), min_size=k, max_size=k))
    return MenuMechanism(np.array(rows, dtype=float))


@st.composite
def measures(draw, max_points: int = 4, dim: int = 2) -> DiscreteMeasureKD:
    k = draw(st.integers(min_value=1, max_value=max_points))
    coord = st.floats(min_value=0.0, max_value=1.0, allow_nan=False).map(lambda v: round(v, 2))
    pts = draw(st.lists(st.tuples(*[coord] * dim), min_size=k, max_size=k))
    w = np.array(draw(st.lists(weights, min_size=k, max_size=k)), dtype=float)
    return DiscreteMeasureKD(np.array(pts, dtype=float), w / w.sum())

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from revlab.distributions import PiecewiseUniform, equal_revenue, smooth, truncate

from .strategies import finite_atoms

GRID = np.linspace(0.0, 5.0, 101)


@given(finite_atoms())
def test_tail_is_nonincreasing_and_bounded_by_revenue(d):
    sol = d.myerson_optimal()
    tails = np.array([d.tail(t) for t in GRID])
    assert np.all(np.diff(tails) <= 1e-12)
    for t, g in zip(GRID[1:], tails[1:]):
        assert g <= min(sol.revenue / t, 1.0) + 1e-12


@given(finite_atoms())
def test_cumtail_is_log_bounded(d):
    r = d.myerson_optimal().revenue
    if r <= 0:
        return
    for t in GRID:
        if t >= r:
            assert d.cumtail(t) <= r + r * math.log(t / r) + 1e-9


@given(finite_atoms())
def test_myerson_is_attained_and_smallest(d):
    sol = d.myerson_optimal()
    assert math.isclose(sol.revenue, sol.price * d.tail(sol.price), rel_tol=1e-12, abs_tol=1e-12)
    for v in d.values:
        assert v * d.tail(v) <= sol.revenue + 1e-12
        if v < sol.price:
            assert v * d.tail(v) < sol.revenue


@settings(max_examples=30, deadline=None)
@given(finite_atoms(), st.sampled_from([0.05, 0.2, 0.5]))
def test_smoothing_is_a_density(d, eps):
    s = smooth(d, eps)
    assert isinstance(s, PiecewiseUniform)
    assert math.isclose(s.tail(s.lower), 1.0, abs_tol=1e-12)
    assert math.isclose(s.mean(), d.mean() + eps / 2, rel_tol=1e-9, abs_tol=1e-9)
    h = 1e-6
    for t in (0.3, 1.7, 2.9):
        slope = (s.cumtail(t + h) - s.cumtail(t - h)) / (2 * h)
        if min(abs(t - b) for b in s.breakpoints()) > 2 * h:
            assert math.isclose(slope, s.tail(t), abs_tol=1e-5)


@given(
    st.floats(min_value=0.1, max_value=3.0, allow_nan=False),
    st.floats(min_value=1.5, max_value=20.0, allow_nan=False),
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
)
def test_equal_revenue_pays_r_at_every_price_up_to_the_cap(r, ratio, frac):
    cap = r * ratio
    d = equal_revenue(r, cap)
    p = min(r + frac * (cap - r), cap)
    assert math.isclose(p * d.tail(p), r, rel_tol=1e-12, abs_tol=1e-12)


@given(finite_atoms())
def test_truncated_revenue_grows_with_the_level(d):
    levels = [0.25, 0.5, 1.0, 2.0, 3.0, 5.0]
    revenues = [truncate(d, M).myerson_optimal().revenue for M in levels]
    assert np.all(np.diff(revenues) >= -1e-12)
    assert math.isclose(revenues[-1], d.myerson_optimal().revenue, abs_tol=1e-12)

import math

import numpy as np
import pytest

from revlab.distributions import (
    EqualRevenue,
    Exponential,
    FiniteAtoms,
    PiecewiseUniform,
    Truncated,
    Uniform,
    discretize,
    dominating_equal_revenue,
    is_weakly_regular,
    myerson_optimal,
    smooth,
    tau,
    truncate,
    virtual_value,
)
from revlab.errors import (
    BadParamsError,
    NoDensityError,
    UnreachableError,
    UnsupportedRepresentationError,
    ZeroDensityError,
)
from revlab.quadrature import integrate


def test_cdf_and_tail_values():
    u = Uniform(0, 1)
    atom = FiniteAtoms([1.0], [1.0])
    assert u.cdf(0.5) == pytest.approx(0.5)
    assert atom.cdf(0.99) == 0.0
    assert atom.cdf(1.0) == 1.0
    assert u.tail(0.25) == pytest.approx(0.75)
    assert EqualRevenue(1, 10).tail(4) == pytest.approx(0.25)
    assert atom.tail(1.0) == 1.0


def test_cumtail_values():
    assert Uniform(0, 1).cumtail(1.0) == pytest.approx(0.5)
    assert EqualRevenue(1, 10).cumtail(2.0) == pytest.approx(1 + math.log(2))
    assert Exponential(1.0).cumtail(0.0) == 0.0


@pytest.mark.parametrize("d", [Uniform(0, 1), EqualRevenue(1, 10), Exponential(2.0, cap=3.0),
                               PiecewiseUniform([0, 0.5, 1.5], [1.8, 0.1])])
def test_cumtail_matches_quadrature_of_tail(d):
    for t in (0.3, 1.2, 2.5):
        expected = integrate(d.tail, 0.0, t, breakpoints=d.breakpoints())
        assert d.cumtail(t) == pytest.approx(expected, abs=1e-8)


def test_myerson_values():
    sol = myerson_optimal(Uniform(0, 1))
    assert sol.price == pytest.approx(0.5)
    assert sol.revenue == pytest.approx(0.25)

    n = 10
    far = myerson_optimal(FiniteAtoms([0.0, n], [1 - 1 / n, 1 / n]))
    assert (far.price, far.revenue) == pytest.approx((10.0, 1.0))

    er = myerson_optimal(EqualRevenue(1, 10))
    assert er.price == pytest.approx(1.0)
    assert er.revenue == pytest.approx(1.0)


def test_virtual_value():
    assert virtual_value(Uniform(0, 1), 0.75) == pytest.approx(0.5)
    assert virtual_value(Uniform(0, 1), 0.5) == pytest.approx(0.0)
    assert virtual_value(Exponential(1.0), 3.0) == pytest.approx(2.0)
    with pytest.raises(NoDensityError):
        virtual_value(FiniteAtoms([1.0], [1.0]), 0.5)
    with pytest.raises(ZeroDensityError):
        virtual_value(Uniform(0, 1), 2.0)


def test_regularity():
    assert is_weakly_regular(Uniform(0, 1))
    assert is_weakly_regular(EqualRevenue(1, 10))
    assert is_weakly_regular(Exponential(1.0, cap=8.0))
    # high density followed by a long thin tail: the virtual value drops at the jump
    assert not is_weakly_regular(PiecewiseUniform([0, 0.5, 1.5], [1.8, 0.1]))
    # low density followed by a short dense block stays regular
    assert is_weakly_regular(PiecewiseUniform([0, 1, 1.5], [0.1, 1.8]))


def test_tau():
    assert tau(Uniform(0, 1), 0.25) == pytest.approx(1 - math.sqrt(0.5), abs=1e-8)
    assert tau(EqualRevenue(1, 10), 1.0) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(UnreachableError):
        tau(Uniform(0, 1), 0.6)
    with pytest.raises(BadParamsError):
        tau(Uniform(0, 1), 0.0)


def test_equal_revenue_shape():
    er = EqualRevenue(1, 10)
    assert er.mean() == pytest.approx(1 + math.log(10))
    assert er.tail(10 - 1e-9) == pytest.approx(0.1, rel=1e-6)
    assert er.atoms() == [(10.0, pytest.approx(0.1))]


def test_dominating_equal_revenue_tail_dominates():
    d = Uniform(0, 1)
    er = dominating_equal_revenue(d)
    assert er.myerson_optimal().revenue == pytest.approx(0.25)
    for t in np.linspace(0.01, 0.99, 50):
        assert er.tail(t) >= d.tail(t) - 1e-12


def test_truncate():
    far = FiniteAtoms([0.0, 10.0], [0.9, 0.1])
    assert truncate(far, 5) == FiniteAtoms([0.0], [1.0])
    assert truncate(Uniform(0, 1), 2) == Uniform(0, 1)

    t = truncate(EqualRevenue(1, 10), 5)
    assert isinstance(t, Truncated)
    sol = t.myerson_optimal()
    assert sol.price == pytest.approx(1.0)
    assert sol.revenue == pytest.approx(0.8)
    with pytest.raises(BadParamsError):
        truncate(Uniform(0, 1), 0)


def test_truncated_mean_drops_the_cut_tail():
    base = EqualRevenue(1, 10)
    t = truncate(base, 5)
    # mass above 5 moves to 0, the rest is unchanged
    expected = integrate(lambda x: x / x**2, 1.0, 5.0)
    assert t.mean() == pytest.approx(expected, abs=1e-8)


def test_smooth():
    s = smooth(FiniteAtoms([1.0], [1.0]), 0.5)
    assert s.density(1.2) == pytest.approx(2.0)
    assert s.density(1.6) == 0.0

    overlap = smooth(FiniteAtoms([0.0, 0.2], [0.5, 0.5]), 0.4)
    assert overlap.density(0.1) == pytest.approx(1.25)
    assert overlap.density(0.3) == pytest.approx(2.5)
    assert overlap.density(0.5) == pytest.approx(1.25)

    base = FiniteAtoms([1.0, 3.0], [0.25, 0.75])
    assert smooth(base, 0.2).mean() == pytest.approx(base.mean() + 0.1)
    with pytest.raises(UnsupportedRepresentationError):
        smooth(Uniform(0, 1), 0.1)


def test_smoothing_revenue_converges():
    base = FiniteAtoms([1.0, 2.0], [0.5, 0.5])
    target = base.myerson_optimal().revenue
    for eps in (0.1, 0.01, 0.001):
        got = smooth(base, eps).myerson_optimal().revenue
        assert abs(got - target) <= 2 * eps


def test_means():
    assert Uniform(0, 1).mean() == pytest.approx(0.5)
    assert FiniteAtoms([0.0, 10.0], [0.9, 0.1]).mean() == pytest.approx(1.0)


def test_discretize_uniform():
    d = discretize(Uniform(0, 1), 4)
    np.testing.assert_allclose(d.values, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(d.probs, [0.25] * 4)


def test_discretize_keeps_mean_and_cap_atom():
    d = EqualRevenue(1, 10)
    disc = discretize(d, 50)
    assert disc.mean() == pytest.approx(d.mean(), rel=1e-9)
    assert 9.82 - 1e-9 <= disc.values.max() <= 10.0
    with pytest.raises(BadParamsError):
        discretize(Exponential(1.0), 10)


def test_finite_atoms_validation():
    with pytest.raises(BadParamsError):
        FiniteAtoms([1.0, 2.0], [0.5, 0.6])
    with pytest.raises(BadParamsError):
        FiniteAtoms([-1.0], [1.0])


def test_exponential_cap_atom():
    e = Exponential(1.0, cap=3.0)
    assert e.atoms() == [(3.0, pytest.approx(math.exp(-3.0)))]
    assert e.tail(3.0) == pytest.approx(math.exp(-3.0))
    assert e.tail(3.0 + 1e-9) == 0.0

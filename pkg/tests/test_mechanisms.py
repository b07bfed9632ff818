import numpy as np
import pytest

from revlab.distributions import FiniteAtoms
from revlab.errors import BadParamsError, QOutOfRangeError
from revlab.mechanisms import (
    GridAssignment,
    MenuMechanism,
    assignment_from_menu,
    best_response,
    bundle_posted,
    constrained_revenue_bound,
    diagonal_profile,
    discount,
    rescale,
    revenue,
    separate_posted,
    verify_ic_ir_npt,
)
from revlab.optrev import FiniteJoint

NULL = MenuMechanism(np.zeros((1, 3)))


def test_null_option_is_added():
    m = MenuMechanism([[1, 1, 3]])
    assert len(m) == 2
    np.testing.assert_array_equal(m.entries[0], [0, 0, 0])


def test_best_response_ties_go_to_higher_payment():
    m = MenuMechanism([[0, 0, 0], [1, 1, 1]])
    assert best_response(m, (0.5, 0.5)) == 1


def test_best_response_by_payoff():
    m = separate_posted(0.5, 0.5)
    assert tuple(m.entries[best_response(m, (0.8, 0.2))]) == (1.0, 0.0, 0.5)
    assert best_response(m, (0.0, 0.0)) == 0


def test_verify_reports_subgradient_violation():
    g = GridAssignment.from_payoffs([[1, 0], [2, 0]], [[1, 0], [1, 0]], [0.5, 0.0])
    report = verify_ic_ir_npt(g)
    assert not report.ok
    assert report.worst_violation == pytest.approx(1.5)
    assert report.witness == (0, 1)
    assert report.kind == "ic"


def test_menu_assignments_are_ic(rng):
    pts = rng.uniform(0, 2, size=(40, 2))
    for m in (separate_posted(0.7, 1.1), bundle_posted(1.3)):
        report = verify_ic_ir_npt(assignment_from_menu(m, pts))
        assert report.ok
        assert report.worst_violation == pytest.approx(0.0, abs=1e-12)


def test_verify_empty_grid():
    g = GridAssignment(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0))
    assert verify_ic_ir_npt(g).ok


def test_revenue_examples(iid_two_point):
    quarter = FiniteAtoms([0.25, 0.75], [0.5, 0.5])
    j = FiniteJoint.product(quarter, quarter)
    assert revenue(separate_posted(0.5, 0.5), j) == pytest.approx(0.5)
    assert revenue(NULL, j) == 0.0
    assert revenue(bundle_posted(3), iid_two_point) == pytest.approx(2.25)
    assert revenue(separate_posted(0, 0), iid_two_point) == 0.0


def test_rescale():
    m = MenuMechanism([[0.5, 0.25, 1.0]])
    np.testing.assert_array_equal(rescale(m, 1, 1).entries, m.entries)
    np.testing.assert_allclose(rescale(m, 0.5, 0.5).entries[1], [1.0, 0.5, 1.0])
    with pytest.raises(QOutOfRangeError):
        rescale(MenuMechanism([[0.6, 0.0, 1.0]]), 0.5, 1)
    with pytest.raises(BadParamsError):
        rescale(m, 0.0, 1.0)


def test_discount():
    m = bundle_posted(2)
    np.testing.assert_array_equal(discount(m, 0).entries, m.entries)
    np.testing.assert_allclose(discount(m, 0.5).entries, [[0, 0, 0], [1, 1, 1]])
    with pytest.raises(BadParamsError):
        discount(m, 1.0)


def test_standard_menus():
    np.testing.assert_array_equal(
        separate_posted(0.5, 0.5).entries,
        [[0, 0, 0], [1, 0, 0.5], [0, 1, 0.5], [1, 1, 1]],
    )
    np.testing.assert_array_equal(bundle_posted(3).entries, [[0, 0, 0], [1, 1, 3]])


def test_diagonal_profile():
    null = diagonal_profile(NULL, np.linspace(0, 2, 5))
    assert not null.phi1.any() and not null.Phi.any()

    prof = diagonal_profile(bundle_posted(1), [0.4, 0.6])
    np.testing.assert_array_equal(prof.phi1, [0, 1])
    np.testing.assert_array_equal(prof.phi2, [0, 1])
    np.testing.assert_allclose(prof.Phi, [0.0, 0.2])

    tie = diagonal_profile(separate_posted(0.5, 0.5), [0.5])
    assert (tie.phi1[0], tie.phi2[0]) == (1.0, 1.0)


def test_constrained_revenue_bound():
    assert constrained_revenue_bound(NULL, 0.0, 1.0, 0.25) == pytest.approx(0.25)
    # allocation 0.5 at x0 pays 0.2: (1 - 0.5) * rev + 0.2
    m = MenuMechanism([[0.5, 0.0, 0.2]])
    assert constrained_revenue_bound(m, 1.0, 1.0, 0.6) == pytest.approx(0.5)


def test_menu_rejects_bad_allocations():
    with pytest.raises(BadParamsError):
        MenuMechanism([[1.5, 0.0, 1.0]])

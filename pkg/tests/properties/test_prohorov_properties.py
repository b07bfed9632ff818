import itertools

import numpy as np
from hypothesis import given, settings

from revlab.continuity import DiscreteMeasureKD, prohorov

from .strategies import measures

SETTINGS = settings(max_examples=40, deadline=None)


def _one_sided(mu: DiscreteMeasureKD, nu: DiscreteMeasureKD) -> float:
    """Smallest rho with mu(A) <= nu(A^rho) + rho over every subset A of mu's support."""
    dist = np.abs(mu.points[:, None, :] - nu.points[None, :, :]).sum(axis=2)
    worst = 0.0
    for size in range(1, len(mu) + 1):
        for A in itertools.combinations(range(len(mu)), size):
            mass = mu.probs[list(A)].sum()
            to_a = dist[list(A)].min(axis=0)
            best = mass
            for level in np.unique(to_a):
                covered = nu.probs[to_a <= level].sum()
                best = min(best, max(level, mass - covered))
            worst = max(worst, best)
    return min(worst, 1.0)


def brute_force(mu: DiscreteMeasureKD, nu: DiscreteMeasureKD) -> float:
    return max(_one_sided(mu, nu), _one_sided(nu, mu))


@SETTINGS
@given(measures(), measures())
def test_matches_subset_enumeration(mu, nu):
    assert abs(prohorov(mu, nu).distance - brute_force(mu, nu)) <= 1e-6


@SETTINGS
@given(measures(), measures())
def test_symmetric_and_bounded(mu, nu):
    d = prohorov(mu, nu).distance
    assert 0.0 <= d <= 1.0
    assert abs(d - prohorov(nu, mu).distance) <= 2e-7


@SETTINGS
@given(measures(), measures(), measures())
def test_triangle_inequality(a, b, c):
    ab, bc, ac = prohorov(a, b).distance, prohorov(b, c).distance, prohorov(a, c).distance
    assert ac <= ab + bc + 3e-7


@SETTINGS
@given(measures())
def test_zero_on_the_diagonal(mu):
    assert prohorov(mu, mu).distance <= 2e-7

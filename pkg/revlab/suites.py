"""
Acceptance suites run by `revlab verify`.

Each suite is a function (seed, budget) -> list of failure messages; an
empty list means the suite passed. Random instances come from a
numpy Generator seeded per suite, so a run is reproducible from the seed.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from revlab.bounds import (
    GoodPair,
    decomposition_check,
    guarantee_general,
    guarantee_regular,
    k_integral,
    k_term_bound,
    k_fun,
    l_fun,
    nonsymmetric_bounds,
    single_crossing_check,
    step_phi_sup,
    sup_i,
    tail_product_integral,
)
from revlab.config import ESTIMATE_TOL, FD_STEP, REFINE_RATIO_TOL
from revlab.continuity import (
    DiscreteMeasureKD,
    continuity_experiment,
    prohorov,
)
from revlab.distributions import (
    Dist1D,
    EqualRevenue,
    Exponential,
    FiniteAtoms,
    PiecewiseUniform,
    Uniform,
    discretize,
    smooth,
)
from revlab.optrev import FiniteJoint, ScanFamily, monrev_lp, rev_lp, scan_worst_ratio, srev

logger = logging.getLogger(__name__)

SuiteFn = Callable[[int, int], list[str]]


@dataclass
class SuiteResult:
    name: str
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return not self.failures and self.error is None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "failures": self.failures,
            "error": self.error,
        }


# =============================================================================
# Instance generators (shared with the test suite)
# =============================================================================

def random_marginal(rng: np.random.Generator, max_support: int = 8, high: float = 4.0) -> FiniteAtoms:
    k = int(rng.integers(1, max_support + 1))
    values = np.round(rng.uniform(0.0, high, size=k), 3)
    probs = rng.dirichlet(np.ones(k))
    return FiniteAtoms(values, probs)


def random_independent_joint(rng: np.random.Generator, max_support: int = 8, high: float = 4.0) -> FiniteJoint:
    return FiniteJoint.product(random_marginal(rng, max_support, high),
                               random_marginal(rng, max_support, high))


def random_joint(rng: np.random.Generator, max_points: int = 4, box: float = 1.0) -> FiniteJoint:
    """Arbitrary (generally correlated) joint on [0, box]^2."""
    k = int(rng.integers(1, max_points + 1))
    points = np.round(rng.uniform(0.0, box, size=(k, 2)), 3)
    return FiniteJoint.from_points(points, rng.dirichlet(np.ones(k)))


def random_density(rng: np.random.Generator) -> PiecewiseUniform:
    """Piecewise-uniform density with 1-3 cells on [0, cap], cap in [1, 3]."""
    cap = float(rng.uniform(1.0, 3.0))
    cells = int(rng.integers(1, 4))
    inner = np.sort(rng.uniform(0.0, cap, size=cells - 1))
    breakpoints = np.concatenate([[0.0], inner, [cap]])
    widths = np.diff(breakpoints)
    keep = widths > 1e-3
    breakpoints = np.concatenate([[0.0], breakpoints[1:][keep]])
    weights = rng.uniform(0.2, 1.0, size=len(breakpoints) - 1)
    densities = weights / np.dot(weights, np.diff(breakpoints))
    return PiecewiseUniform(breakpoints, densities)


def regular_dists() -> list[Dist1D]:
    return [Uniform(0.0, 1.0), Exponential(1.0, cap=8.0), EqualRevenue(1.0, 8.0)]


def irregular_pair() -> GoodPair:
    """A pair whose K1 turns positive and then negative again."""
    return GoodPair.from_dists(
        Uniform(0.0, 1.0),
        PiecewiseUniform([0.0, 0.5, 0.6, 3.0], [0.2, 6.0, 0.125]),
    )


# =============================================================================
# Suites
# =============================================================================

def suite_myerson(seed: int, budget: int) -> list[str]:
    failures = []
    cases = [
        ("uniform(0,1)", Uniform(0.0, 1.0), 0.5, 0.25),
        ("atoms {0, 10}", FiniteAtoms([0.0, 10.0], [0.9, 0.1]), 10.0, 1.0),
        ("equal_revenue(1, 10)", EqualRevenue(1.0, 10.0), 1.0, 1.0),
    ]
    for name, d, price, rev in cases:
        sol = d.myerson_optimal()
        if abs(sol.price - price) > 1e-9 or abs(sol.revenue - rev) > 1e-9:
            failures.append(f"{name}: got ({sol.price}, {sol.revenue}), want ({price}, {rev})")
    return failures


def suite_general_guarantee(seed: int, budget: int) -> list[str]:
    """SRev/Rev floor and the square-root bound on random independent instances."""
    rng = np.random.default_rng(seed)
    failures = []
    for k in range(min(budget, 200)):
        j = random_independent_joint(rng)
        rev = rev_lp(j).value
        m1, m2 = j.marginals()
        r1, r2 = m1.myerson_optimal().revenue, m2.myerson_optimal().revenue
        if rev <= 0:
            continue
        ratio = (r1 + r2) / rev
        if ratio < guarantee_general() - 1e-6:
            failures.append(f"instance {k}: SRev/Rev = {ratio:.6f}")
        if rev > (math.sqrt(r1) + math.sqrt(r2)) ** 2 + 1e-8:
            failures.append(f"instance {k}: Rev {rev:.6f} above (sqrt r1 + sqrt r2)^2")
    if not nonsymmetric_bounds(1.0, 4.0)["root_sum"] < 10.0:
        failures.append("R = (1, 4): square-root bound does not beat 2(R1 + R2)")
    return failures


def suite_regular_guarantee(seed: int, budget: int) -> list[str]:
    failures = []
    dists = regular_dists()
    for a in range(len(dists)):
        for b in range(a, len(dists)):
            ratios = []
            for n in (12, 16):
                j = FiniteJoint.product(discretize(dists[a], n), discretize(dists[b], n))
                ratios.append(srev(j) / rev_lp(j).value)
            label = f"{dists[a].kind} x {dists[b].kind}"
            logger.info("%s: ratio %s", label, ", ".join(f"{r:.5f}" for r in ratios))
            if min(ratios) < guarantee_regular() - 0.01:
                failures.append(f"{label}: SRev/Rev = {min(ratios):.5f}")
            if ratios[1] < ratios[0] - REFINE_RATIO_TOL:
                failures.append(f"{label}: ratio drops from {ratios[0]:.5f} to {ratios[1]:.5f} "
                                f"as the grid refines")
    return failures


def tail_estimate_failures(pair: GoodPair, n_grid: int = 25) -> list[str]:
    """
    Grid check of int_u^inf G1 G2 <= r1 r2 / u, and for u >= r_i of
    L_i(u) <= r_j / e and L_i(u) + r1 r2 / u <= r_j.
    """
    failures = []
    r = {1: pair.r1, 2: pair.r2}
    for u in np.linspace(pair.cap / n_grid, pair.cap, n_grid):
        tail = tail_product_integral(pair, u)
        if tail > pair.r1 * pair.r2 / u + ESTIMATE_TOL:
            failures.append(f"int G1 G2 from {u:.4f} is {tail:.8f}, above r1 r2 / u")
        for i, j in ((1, 2), (2, 1)):
            if u < r[i]:
                continue
            L = l_fun(pair, i, u)
            if L > r[j] / math.e + ESTIMATE_TOL:
                failures.append(f"L{i}({u:.4f}) = {L:.8f} above r{j} / e")
            if L + pair.r1 * pair.r2 / u > r[j] + ESTIMATE_TOL:
                failures.append(f"L{i}({u:.4f}) + r1 r2 / u above r{j}")
    return failures


def suite_bound_engine(seed: int, budget: int) -> list[str]:
    rng = np.random.default_rng(seed)
    failures = []
    for k in range(min(budget, 50)):
        pair = GoodPair.from_dists(random_density(rng), random_density(rng))
        lam2 = float(rng.uniform(0.2, 1.0))
        lam1 = float(rng.uniform(0.2, lam2))
        sup = sup_i(pair, lam1, lam2)
        bound = k_term_bound(lam1, lam2, pair.r1, pair.r2)
        if sup.value > bound + 1e-6:
            failures.append(f"pair {k}: sup I = {sup.value:.8f} above {bound:.8f}")
        brute = step_phi_sup(pair, lam1, lam2)
        if brute > sup.value + 1e-6:
            failures.append(f"pair {k}: step search {brute:.8f} above sup I {sup.value:.8f}")
        failures.extend(f"pair {k}: {msg}" for msg in tail_estimate_failures(pair))
    return failures


def suite_decomposition(seed: int, budget: int) -> list[str]:
    failures = []
    two_point = smooth(FiniteAtoms([1.0, 2.0], [0.5, 0.5]), 0.2)
    cases = [("smoothed {1,2}", two_point, 8), ("uniform", Uniform(0.0, 1.0), 8)]
    lambdas = [(1.0, 1.0), (1.0 / math.sqrt(math.e), 1.0)]
    for name, d, n in cases:
        pair = GoodPair.from_dists(d, d)
        j = FiniteJoint.product(discretize(d, n), discretize(d, n))
        for lam1, lam2 in lambdas:
            menu = rev_lp(j, npt=True, q_caps=(lam1, lam2)).to_menu()
            res = decomposition_check(pair, menu, lam1, lam2)
            if res.slack < -1e-3:
                failures.append(f"{name}, lambda=({lam1:.4f}, {lam2}): slack {res.slack:.6f}")
    return failures


def suite_calculus(seed: int, budget: int) -> list[str]:
    failures = []
    dists = regular_dists() + [irregular_pair().d2]
    h = FD_STEP
    for a in range(len(dists)):
        for b in range(len(dists)):
            pair = GoodPair.from_dists(dists[a], dists[b])
            bps = np.array(pair.breakpoints())
            for u in np.linspace(0.05, pair.cap - 0.05, 13):
                for i in (1, 2):
                    if np.min(np.abs(bps - u)) > 4 * h:
                        fd = (l_fun(pair, i, u + h) - l_fun(pair, i, u - h)) / (2 * h)
                        if abs(fd + k_fun(pair, i, u)) > 1e-6:
                            failures.append(f"L' != -K at {u:.4f} (pair {a},{b}, i={i})")
                    if abs(k_integral(pair, i, u) - l_fun(pair, i, u)) > 1e-7:
                        failures.append(f"int K != L at {u:.4f} (pair {a},{b}, i={i})")
    for d in dists:
        r = d.myerson_optimal().revenue
        for t in np.linspace(1e-3, d.upper, 200):
            if d.tail(t) > min(r / t, 1.0) + 1e-12:
                failures.append(f"{d.kind}: G({t:.4f}) above min(r/t, 1)")
            if t >= r and d.cumtail(t) > r + r * math.log(t / r) + 1e-9:
                failures.append(f"{d.kind}: H({t:.4f}) above r + r log(t/r)")
    return failures


def suite_single_crossing(seed: int, budget: int) -> list[str]:
    failures = []
    dists = regular_dists()
    for a in dists:
        for b in dists:
            pair = GoodPair.from_dists(a, b)
            for i in (1, 2):
                if not single_crossing_check(pair, i):
                    failures.append(f"{a.kind} x {b.kind}: K{i} is not single crossing")
    if single_crossing_check(irregular_pair(), 1):
        failures.append("irregular pair passes the single-crossing check")
    return failures


def suite_monrev(seed: int, budget: int) -> list[str]:
    rng = np.random.default_rng(seed)
    failures = []
    for k in range(min(budget, 30)):
        j = random_independent_joint(rng, max_support=5)
        rev, mon = rev_lp(j).value, monrev_lp(j).value
        if mon > rev + 1e-7:
            failures.append(f"instance {k}: MonRev {mon:.8f} above Rev {rev:.8f}")
    for cap in (4.0, 8.0):
        d = discretize(EqualRevenue(1.0, cap), 12)
        j = FiniteJoint.product(d, d)
        ratio = srev(j) / monrev_lp(j).value
        if ratio < guarantee_regular() - 0.01:
            failures.append(f"equal_revenue cap {cap}: SRev/MonRev = {ratio:.5f}")
    return failures


def suite_continuity(seed: int, budget: int) -> list[str]:
    rng = np.random.default_rng(seed)
    failures = []

    def measure() -> DiscreteMeasureKD:
        k = int(rng.integers(1, 7))
        return DiscreteMeasureKD(np.round(rng.uniform(0, 1, (k, 2)), 3), rng.dirichlet(np.ones(k)))

    for k in range(min(budget, 30)):
        a, b, c = measure(), measure(), measure()
        ab, bc, ac = (prohorov(a, b).distance, prohorov(b, c).distance, prohorov(a, c).distance)
        if ac > ab + bc + 2e-6:
            failures.append(f"triple {k}: triangle inequality fails ({ac:.7f} > {ab:.7f} + {bc:.7f})")
        if abs(ab - prohorov(b, a).distance) > 2e-6:
            failures.append(f"triple {k}: distance not symmetric")
        if prohorov(a, a).distance > 1e-6:
            failures.append(f"triple {k}: distance to itself is positive")

    for k in range(20):
        x, y = rng.uniform(0, 1.5, 2), rng.uniform(0, 1.5, 2)
        got = prohorov(DiscreteMeasureKD.dirac(x), DiscreteMeasureKD.dirac(y)).distance
        want = min(float(np.abs(x - y).sum()), 1.0)
        if abs(got - want) > 1e-6:
            failures.append(f"dirac pair {k}: {got:.7f} != {want:.7f}")

    for k in range(min(budget, 100)):
        res = continuity_experiment(random_joint(rng), random_joint(rng), M=2.0)
        if not res.ok:
            failures.append(f"pair {k}: gap {res.gap:.6f} above bound {res.bound:.6f}")
    return failures


def suite_scan(seed: int, budget: int) -> list[str]:
    result = scan_worst_ratio(ScanFamily(), budget=len(ScanFamily().marginals()), seed=seed)
    if result.best_ratio is None or result.best_ratio > 0.89:
        return [f"worst lattice ratio {result.best_ratio} above 0.89"]
    return []


SUITES: dict[str, SuiteFn] = {
    "myerson": suite_myerson,
    "general_guarantee": suite_general_guarantee,
    "regular_guarantee": suite_regular_guarantee,
    "bound_engine": suite_bound_engine,
    "decomposition": suite_decomposition,
    "calculus": suite_calculus,
    "single_crossing": suite_single_crossing,
    "monrev": suite_monrev,
    "continuity": suite_continuity,
    "scan": suite_scan,
}


def run_suites(names: list[str] | None, seed: int, budget: int) -> list[SuiteResult]:
    """Run the named suites (all by default); errors are caught per suite."""
    results = []
    for name in names or list(SUITES):
        if name not in SUITES:
            results.append(SuiteResult(name, error=f"unknown suite {name!r}"))
            continue
        start = time.perf_counter()
        result = SuiteResult(name)
        try:
            result.failures = SUITES[name](seed, budget)
        except Exception as e:
            logger.exception("suite %s raised", name)
            result.error = f"{type(e).__name__}: {e}"
        result.seconds = time.perf_counter() - start
        results.append(result)
    return results

"""
Revenue bound machinery for two independent goods.

For a pair of capped distributions with densities (r_i the Myerson revenue
of good i, H_i the cumulative tail):

    K1(t) = f2(t) (H1(t) - r1) - G1(t) G2(t)        (K2 symmetric)
    L1(t) = G2(t) (H1(t) - r1),   L1' = -K1,   int_u^inf K1 = L1(u)

A mechanism with q_i <= lambda_i earns at most
lambda1 r1 + lambda2 r2 + int (phi1 K1 + phi2 K2), phi_i(t) = q_i(t, t), and the
correction integral is at most sup over 0 <= a <= b <= c of

    I(a,b,c) = l1 int_a^c max{K1,K2} + l1 int_c^inf (K1+K2) + (l2-l1) int_b^inf K2.

Atoms of f_j (the cap atom of capped families) enter K_i as point masses
m * (H_i - r_i); every integral below includes them, which keeps the
identities exact on capped supports.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from revlab.config import (
    CROSSING_GRID_N,
    DECOMPOSITION_GRID_N,
    QUAD_TOL,
    SINGLE_CROSSING_TOL,
    SUP_GRID_N,
    SUP_REFINE_ROUNDS,
)
from revlab.distributions import Dist1D, tau
from revlab.errors import (
    BadOrderingError,
    BadParamsError,
    DegenerateError,
    NoDensityError,
    QOutOfRangeError,
)
from revlab.mechanisms import MenuMechanism, best_responses, diagonal_profile, revenue
from revlab.quadrature import integrate

logger = logging.getLogger(__name__)

E = math.e
GUARANTEE_GENERAL = math.sqrt(E) / (math.sqrt(E) + 1.0)   # ~0.6225
GUARANTEE_REGULAR = E / (E + 1.0)                         # ~0.7311


def guarantee_general() -> float:
    """SRev / Rev floor for independent goods."""
    return GUARANTEE_GENERAL


def guarantee_regular() -> float:
    """SRev / Rev floor when both goods are regular."""
    return GUARANTEE_REGULAR


# =============================================================================
# Good pairs
# =============================================================================

@dataclass(frozen=True)
class GoodPair:
    d1: Dist1D
    d2: Dist1D
    r1: float
    r2: float
    tau1: float
    tau2: float

    @classmethod
    def from_dists(cls, d1: Dist1D, d2: Dist1D) -> GoodPair:
        rs, taus = [], []
        for k, d in enumerate((d1, d2), start=1):
            if not d.has_density:
                raise NoDensityError(f"good {k}: bounds need a density representation")
            if not math.isfinite(d.upper):
                raise BadParamsError(f"good {k}: cap the distribution first")
            r = d.myerson_optimal().revenue
            if r <= 0:
                raise BadParamsError(f"good {k}: Myerson revenue must be positive")
            rs.append(r)
            taus.append(tau(d, r))
        return cls(d1, d2, rs[0], rs[1], taus[0], taus[1])

    @property
    def cap(self) -> float:
        return max(self.d1.upper, self.d2.upper)

    def goods(self, i: int) -> tuple[Dist1D, Dist1D, float]:
        """(d_i, d_j, r_i) for i in {1, 2}."""
        if i == 1:
            return self.d1, self.d2, self.r1
        if i == 2:
            return self.d2, self.d1, self.r2
        raise BadParamsError(f"good index must be 1 or 2, got {i}")

    def breakpoints(self) -> list[float]:
        pts = {0.0, self.cap}
        for d in (self.d1, self.d2):
            pts.update(p for p in d.breakpoints() if 0 <= p <= self.cap)
            pts.update(v for v, _ in d.atoms() if 0 <= v <= self.cap)
        return sorted(pts)


@dataclass(frozen=True)
class BoundCertificate:
    lambda1: float
    lambda2: float
    k_term: float
    k_term_bound: float
    total_bound: float
    which: str              # general | regular | nonsymmetric | nonsymmetric_mixed

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SupResult:
    value: float
    a: float
    b: float
    c: float
    grid_value: float


@dataclass(frozen=True)
class TheoremBound:
    bound: float
    chain: float
    lam: float | None


@dataclass(frozen=True)
class DecompositionResult:
    lhs: float
    rhs: float
    slack: float


# =============================================================================
# Auxiliary functions
# =============================================================================

def k_fun(pair: GoodPair, i: int, t: float) -> float:
    """K_i(t) = f_j(t) (H_i(t) - r_i) - G_i(t) G_j(t)."""
    di, dj, ri = pair.goods(i)
    if not dj.has_density:
        raise NoDensityError("K needs the other good's density")
    return dj.density(t) * (di.cumtail(t) - ri) - di.tail(t) * dj.tail(t)


def l_fun(pair: GoodPair, i: int, t: float) -> float:
    """L_i(t) = G_j(t) (H_i(t) - r_i)."""
    di, dj, ri = pair.goods(i)
    return dj.tail(t) * (di.cumtail(t) - ri)


def m_fun(pair: GoodPair, i: int, t: float) -> float:
    """M_i = K_i + G1 G2 (diagnostic)."""
    return k_fun(pair, i, t) + pair.d1.tail(t) * pair.d2.tail(t)


def kappa(pair: GoodPair, i: int, t: float) -> float:
    """K_i / (f_j G_i); nan where the denominator vanishes (diagnostic)."""
    di, dj, _ = pair.goods(i)
    denom = dj.density(t) * di.tail(t)
    return k_fun(pair, i, t) / denom if denom > 0 else math.nan


def k_atoms(pair: GoodPair, i: int) -> list[tuple[float, float]]:
    """Point masses of K_i: m * (H_i(a) - r_i) at each atom a of good j."""
    di, dj, ri = pair.goods(i)
    return [(a, m * (di.cumtail(a) - ri)) for a, m in dj.atoms()]


def _dirac_weights(pair: GoodPair) -> dict[float, tuple[float, float]]:
    weights: dict[float, list[float]] = {}
    for slot, i in ((0, 1), (1, 2)):
        for a, w in k_atoms(pair, i):
            weights.setdefault(a, [0.0, 0.0])[slot] += w
    return {a: (w[0], w[1]) for a, w in weights.items()}


def tail_integral_K(pair: GoodPair, i: int, u: float) -> float:
    """int_u^inf K_i = L_i(u)."""
    return l_fun(pair, i, u)


def k_integral(pair: GoodPair, i: int, u: float, v: float | None = None, tol: float = QUAD_TOL) -> float:
    """
    Quadrature of K_i over [u, v), atoms included; v defaults to the cap,
    in which case the cap atom is included as well.
    """
    top = pair.cap if v is None else min(v, pair.cap)
    closed = v is None or v >= pair.cap
    smooth = integrate(lambda t: k_fun(pair, i, t), u, top, pair.breakpoints(), tol) if top > u else 0.0
    point = sum(w for a, w in k_atoms(pair, i) if a >= u and (a < top or (closed and a <= top)))
    return smooth + point


def tail_product_integral(pair: GoodPair, u: float, tol: float = QUAD_TOL) -> float:
    """int_u^inf G1 G2."""
    if u >= pair.cap:
        return 0.0
    return integrate(lambda t: pair.d1.tail(t) * pair.d2.tail(t), u, pair.cap, pair.breakpoints(), tol)


# =============================================================================
# The correction integral I(a, b, c)
# =============================================================================

def _check_lambdas(lambda1: float, lambda2: float) -> None:
    if not (lambda1 > 0 and lambda2 > 0):
        raise BadParamsError("lambdas must be positive")
    if lambda1 > lambda2:
        raise BadOrderingError(f"need lambda1 <= lambda2, got {lambda1} > {lambda2}")


def i_abc(
    pair: GoodPair,
    lambda1: float,
    lambda2: float,
    a: float,
    b: float,
    c: float,
    tol: float = QUAD_TOL,
) -> float:
    """I(a, b, c) by adaptive quadrature (atoms included)."""
    _check_lambdas(lambda1, lambda2)
    slack = 1e-12 * max(1.0, pair.cap)
    if not (-slack <= a <= b <= c <= pair.cap + slack):
        raise BadOrderingError(f"need 0 <= a <= b <= c <= cap, got ({a}, {b}, {c})")
    cap = pair.cap
    bps = pair.breakpoints()
    diracs = _dirac_weights(pair)

    def kmax(t: float) -> float:
        return max(k_fun(pair, 1, t), k_fun(pair, 2, t))

    def ksum(t: float) -> float:
        return k_fun(pair, 1, t) + k_fun(pair, 2, t)

    middle = integrate(kmax, a, c, bps, tol / 3) if c > a else 0.0
    middle += sum(max(w1, w2) for t, (w1, w2) in diracs.items() if a <= t < c)
    upper = integrate(ksum, c, cap, bps, tol / 3) if cap > c else 0.0
    upper += sum(w1 + w2 for t, (w1, w2) in diracs.items() if t >= c)
    top = k_integral(pair, 2, b, None, tol / 3)
    return lambda1 * middle + lambda1 * upper + (lambda2 - lambda1) * top


class _CellTable:
    """Cumulative integrals of max{K1,K2}, K1, K2 on a grid of edges."""

    def __init__(self, pair: GoodPair, edges: np.ndarray, tol: float = QUAD_TOL):
        self.pair = pair
        self.edges = edges
        self.tol = tol
        self.bps = pair.breakpoints()
        self.diracs = _dirac_weights(pair)
        n = len(edges) - 1
        cmax, c1, c2 = np.zeros(n), np.zeros(n), np.zeros(n)
        cell_tol = tol / max(n, 1)
        for k in range(n):
            lo, hi = float(edges[k]), float(edges[k + 1])
            cmax[k] = self._segment(self._kmax, lo, hi, cell_tol)
            c1[k] = self._segment(lambda t: k_fun(pair, 1, t), lo, hi, cell_tol)
            c2[k] = self._segment(lambda t: k_fun(pair, 2, t), lo, hi, cell_tol)
            for t, (w1, w2) in self.diracs.items():
                if lo <= t < hi:
                    cmax[k] += max(w1, w2)
                    c1[k] += w1
                    c2[k] += w2
        cap_w1 = sum(w1 for t, (w1, _) in self.diracs.items() if t >= edges[-1])
        cap_w2 = sum(w2 for t, (_, w2) in self.diracs.items() if t >= edges[-1])
        self.cells = (cmax, c1, c2)
        self.Mx = np.concatenate([[0.0], np.cumsum(cmax)])
        self.T1 = np.concatenate([np.cumsum(c1[::-1])[::-1], [0.0]]) + cap_w1
        self.T2 = np.concatenate([np.cumsum(c2[::-1])[::-1], [0.0]]) + cap_w2

    def _kmax(self, t: float) -> float:
        return max(k_fun(self.pair, 1, t), k_fun(self.pair, 2, t))

    def _segment(self, fn, lo: float, hi: float, tol: float) -> float:
        return integrate(fn, lo, hi, self.bps, tol) if hi > lo else 0.0

    def _locate(self, t: float) -> int:
        return int(min(np.searchsorted(self.edges, t, side="right") - 1, len(self.edges) - 1))

    def _partial(self, fn, slot: int | None, t: float) -> tuple[int, float]:
        """(k, integral of fn plus atoms over [edge_k, t))."""
        k = self._locate(t)
        lo = float(self.edges[k])
        value = self._segment(fn, lo, t, self.tol / 10)
        if t > lo and lo in self.diracs:
            w1, w2 = self.diracs[lo]
            value += max(w1, w2) if slot is None else (w1, w2)[slot]
        return k, value

    def mx(self, t: float) -> float:
        k, part = self._partial(self._kmax, None, t)
        return self.Mx[k] + part

    def tail(self, i: int, t: float) -> float:
        k, part = self._partial(lambda u: k_fun(self.pair, i, u), i - 1, t)
        return (self.T1 if i == 1 else self.T2)[k] - part


def k_cell_integrals(pair: GoodPair, edges, tol: float = QUAD_TOL):
    """
    Per-cell integrals over [edge_k, edge_k+1) of max{K1,K2}, K1 and K2.

    Returns:
        (cmax, c1, c2, cap_atoms) where cap_atoms = (w1, w2) are the point
        masses sitting at or beyond the last edge.
    """
    table = _CellTable(pair, np.asarray(edges, dtype=float), tol)
    cmax, c1, c2 = table.cells
    return cmax, c1, c2, (float(table.T1[-1]), float(table.T2[-1]))


def sup_edges(pair: GoodPair, grid_n: int = SUP_GRID_N) -> np.ndarray:
    """Search grid: grid_n even points on [0, cap] plus breakpoints and tau_1, tau_2."""
    extra = [p for p in (*pair.breakpoints(), pair.tau1, pair.tau2) if 0 <= p <= pair.cap]
    return np.union1d(np.linspace(0.0, pair.cap, max(grid_n, 2)), extra)


def sup_i(
    pair: GoodPair,
    lambda1: float,
    lambda2: float,
    grid_n: int = SUP_GRID_N,
    refine_rounds: int = SUP_REFINE_ROUNDS,
) -> SupResult:
    """
    sup over 0 <= a <= b <= c of I(a, b, c).

    A grid search over the monotone simplex (grid_n evenly spaced points plus
    breakpoints and tau_1, tau_2) is followed by coordinatewise refinement in
    the cells adjacent to the grid optimum. The result is a lower bound on the
    true supremum; it is exact up to quadrature when the maximizers are grid
    points.
    """
    _check_lambdas(lambda1, lambda2)
    cap = pair.cap
    edges = sup_edges(pair, grid_n)
    table = _CellTable(pair, edges)
    Mx, T1, T2 = table.Mx, table.T1, table.T2
    n = len(edges)

    best = (-math.inf, 0, 0, 0)
    for a in range(n):
        run_max = np.maximum.accumulate(T2[a:])
        run_arg = np.zeros(n - a, dtype=np.int64)
        for k in range(1, n - a):
            run_arg[k] = k if T2[a + k] > T2[a + run_arg[k - 1]] else run_arg[k - 1]
        values = (lambda1 * (Mx[a:] - Mx[a]) + lambda1 * (T1[a:] + T2[a:])
                  + (lambda2 - lambda1) * run_max)
        k = int(np.argmax(values))
        if values[k] > best[0]:
            best = (float(values[k]), a, a + int(run_arg[k]), a + k)
    grid_value, ia, ib, ic = best
    a, b, c = float(edges[ia]), float(edges[ib]), float(edges[ic])
    logger.debug("sup_i grid: %.10g at (%g, %g, %g)", grid_value, a, b, c)

    def objective(a: float, b: float, c: float) -> float:
        return (lambda1 * (table.mx(c) - table.mx(a))
                + lambda1 * (table.tail(1, c) + table.tail(2, c))
                + (lambda2 - lambda1) * table.tail(2, b))

    def window(x: float, lo: float, hi: float) -> tuple[float, float]:
        k = int(np.searchsorted(edges, x))
        return max(lo, float(edges[max(k - 1, 0)])), min(hi, float(edges[min(k + 1, n - 1)]))

    current = objective(a, b, c)
    for _ in range(refine_rounds):
        for coord in "abc":
            if coord == "a":
                lo, hi = window(a, 0.0, b)
                f = lambda x: -objective(x, b, c)
            elif coord == "b":
                lo, hi = window(b, a, c)
                f = lambda x: -objective(a, x, c)
            else:
                lo, hi = window(c, b, cap)
                f = lambda x: -objective(a, b, x)
            if hi <= lo:
                continue
            res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
            if -res.fun > current:
                current = -res.fun
                a, b, c = {"a": (res.x, b, c), "b": (a, res.x, c), "c": (a, b, res.x)}[coord]
    value = max(i_abc(pair, lambda1, lambda2, a, b, c), grid_value)
    return SupResult(value=value, a=a, b=b, c=c, grid_value=grid_value)


def step_phi_sup(pair: GoodPair, lambda1: float, lambda2: float, grid_n: int = SUP_GRID_N) -> float:
    """
    Brute-force counterpart of sup_i: maximize int(phi1 K1 + phi2 K2) over
    step functions on the sup_i grid with 0 <= phi_i <= lambda_i and
    phi1 + phi2 nondecreasing, solved as an LP.
    """
    from scipy.optimize import linprog
    from scipy.sparse import diags, hstack

    _check_lambdas(lambda1, lambda2)
    _, c1, c2, (w1, w2) = k_cell_integrals(pair, sup_edges(pair, grid_n))
    # one more step for the point masses at the cap
    g1 = np.append(c1, w1)
    g2 = np.append(c2, w2)
    n = len(g1)
    step = diags([np.ones(n - 1), -np.ones(n - 1)], [0, 1], shape=(n - 1, n))
    res = linprog(
        -np.concatenate([g1, g2]),
        A_ub=hstack([step, step]).tocsr(),
        b_ub=np.zeros(n - 1),
        bounds=[(0.0, lambda1)] * n + [(0.0, lambda2)] * n,
        method="highs",
    )
    if res.status != 0:
        raise DegenerateError(f"step search failed: {res.message}")
    return float(-res.fun)


# =============================================================================
# Closed-form bounds
# =============================================================================

def k_term_bound(lambda1: float, lambda2: float, r1: float, r2: float) -> float:
    """(1/e)(lambda2 r1 + lambda1 r2 + lambda1 (e - 1) min{r1, r2})."""
    if not (0 < lambda1 <= lambda2 <= 1):
        raise BadParamsError(f"need 0 < lambda1 <= lambda2 <= 1, got ({lambda1}, {lambda2})")
    if r1 <= 0 or r2 <= 0:
        raise BadParamsError("revenues must be positive")
    return (lambda2 * r1 + lambda1 * r2 + lambda1 * (E - 1) * min(r1, r2)) / E


def monotone_phi_bound(lambda1: float, lambda2: float, r1: float, r2: float) -> float:
    """Correction bound when phi1, phi2 are each nondecreasing."""
    return (lambda1 * r2 + lambda2 * r1) / E


def theorem_lambda_chain(R1: float, R2: float, lam: float) -> float:
    """R1 + R2 + R1/(lam e) + lam R2."""
    if not (0 < lam <= 1):
        raise BadParamsError(f"lam must lie in (0, 1], got {lam}")
    return R1 + R2 + R1 / (lam * E) + lam * R2


def theorem_general_bound(R1: float, R2: float) -> TheoremBound:
    """(1 + 1/sqrt(e))(R1 + R2), plus the chain at its best lam in (0, 1]."""
    bound = (R1 + R2) / guarantee_general()
    if R1 <= 0 or R2 <= 0:
        return TheoremBound(bound=bound, chain=bound, lam=None)
    lam = min(math.sqrt(R1 / (E * R2)), 1.0)
    return TheoremBound(bound=bound, chain=theorem_lambda_chain(R1, R2, lam), lam=lam)


def theorem_regular_bound(r1: float, r2: float) -> float:
    """(1 + 1/e)(r1 + r2)."""
    return (r1 + r2) / guarantee_regular()


def nonsymmetric_bounds(R1: float, R2: float) -> dict:
    root = math.sqrt(R1 * R2)
    root_sum = (math.sqrt(R1) + math.sqrt(R2)) ** 2
    mixed = R1 + R2 + min(2 * root / math.sqrt(E), 2 * root / E + (1 - 1 / E) * min(R1, R2))
    return {"root_sum": root_sum, "mixed": mixed, "best": min(root_sum, mixed)}


# =============================================================================
# Checks
# =============================================================================

def single_crossing_check(
    pair: GoodPair,
    i: int,
    grid_n: int = CROSSING_GRID_N,
    tol: float = SINGLE_CROSSING_TOL,
) -> bool:
    """True iff no positive K_i value is followed by a negative one on [0, cap)."""
    cap = pair.cap
    grid = np.union1d(np.linspace(0.0, cap, grid_n), pair.breakpoints())
    grid = grid[grid < cap]
    values = np.array([k_fun(pair, i, t) for t in grid])
    positive = np.flatnonzero(values > tol)
    if positive.size == 0:
        return True
    first = positive[0]
    negative = np.flatnonzero(values[first:] < -tol)
    if negative.size == 0:
        return True
    v = grid[first + negative[0]]
    logger.info(
        "K%d changes sign back: K(%g)=%.3e > 0, K(%g)=%.3e < 0; kappa=%.4g, M=%.4g",
        i, grid[first], values[first], v, values[first + negative[0]],
        kappa(pair, i, v), m_fun(pair, i, v),
    )
    return False


def _switch_points(m: MenuMechanism, grid: np.ndarray, iters: int = 60) -> list[float]:
    """Diagonal points where the chosen option changes, located by bisection."""
    diag = np.column_stack([grid, grid])
    idx = best_responses(m, diag)
    out = []
    for k in np.flatnonzero(idx[1:] != idx[:-1]):
        lo, hi = float(grid[k]), float(grid[k + 1])
        left = idx[k]
        for _ in range(iters):
            mid = (lo + hi) / 2
            if best_responses(m, [[mid, mid]])[0] == left:
                lo = mid
            else:
                hi = mid
        out.append(hi)
    return out


def decomposition_check(
    pair: GoodPair,
    mech: MenuMechanism,
    lambda1: float,
    lambda2: float,
    n_grid: int = DECOMPOSITION_GRID_N,
) -> DecompositionResult:
    """
    Compare a mechanism's revenue with lambda1 r1 + lambda2 r2 + int(phi1 K1 + phi2 K2).

    lhs is the revenue on an n_grid x n_grid product discretization of the
    pair; rhs integrates K against the diagonal allocations cell by cell,
    with cell edges at every diagonal switch point so phi is constant per cell.
    """
    from revlab.distributions import discretize
    from revlab.optrev import FiniteJoint

    lam = np.array([lambda1, lambda2])
    if np.any(mech.q > lam[None, :] + 1e-12):
        raise QOutOfRangeError(f"menu allocations exceed lambda = ({lambda1}, {lambda2})")

    joint = FiniteJoint.product(discretize(pair.d1, n_grid), discretize(pair.d2, n_grid))
    lhs = revenue(mech, joint)

    cap = pair.cap
    coarse = np.linspace(0.0, cap, n_grid + 1)
    edges = np.union1d(np.union1d(coarse, pair.breakpoints()), _switch_points(mech, coarse))
    edges = edges[(edges >= 0) & (edges <= cap)]
    _, c1, c2, (w1_cap, w2_cap) = k_cell_integrals(pair, edges)
    profile = diagonal_profile(mech, (edges[:-1] + edges[1:]) / 2)
    at_cap = diagonal_profile(mech, [cap])

    correction = float(np.dot(profile.phi1, c1) + np.dot(profile.phi2, c2))
    correction += float(at_cap.phi1[0] * w1_cap + at_cap.phi2[0] * w2_cap)
    rhs = lambda1 * pair.r1 + lambda2 * pair.r2 + correction
    return DecompositionResult(lhs=lhs, rhs=rhs, slack=rhs - lhs)


def certificates(
    pair: GoodPair,
    lambda1: float = 1.0,
    lambda2: float = 1.0,
    grid_n: int = SUP_GRID_N,
    regular: bool = False,
) -> list[BoundCertificate]:
    """All bound variants for one pair; the regular one only when requested."""
    r1, r2 = pair.r1, pair.r2
    sup = sup_i(pair, lambda1, lambda2, grid_n)
    kb = k_term_bound(lambda1, lambda2, r1, r2)
    out = [BoundCertificate(lambda1, lambda2, sup.value, kb,
                            lambda1 * r1 + lambda2 * r2 + kb, "general")]
    if regular:
        grid = np.union1d(np.linspace(0.0, pair.cap, CROSSING_GRID_N), pair.breakpoints())
        k_term = max(0.0, max(l_fun(pair, 1, t) for t in grid)) + max(0.0, max(l_fun(pair, 2, t) for t in grid))
        out.append(BoundCertificate(1.0, 1.0, k_term, (r1 + r2) / E,
                                    theorem_regular_bound(r1, r2), "regular"))
    ns = nonsymmetric_bounds(r1, r2)
    for which in ("root_sum", "mixed"):
        extra = ns[which] - r1 - r2
        label = "nonsymmetric" if which == "root_sum" else "nonsymmetric_mixed"
        out.append(BoundCertificate(1.0, 1.0, extra, extra, ns[which], label))
    return out

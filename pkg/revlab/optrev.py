"""
Optimal, monotone and separate revenue for finite two-good valuations.

Rev is the value of the LP

    maximize  sum_x p(x) (q(x).x - b(x))
    s.t.      b(y) - b(x) >= q(x).(y - x)   for ordered pairs (x, y)
              0 <= q(x) <= caps,  b(x) >= 0

(b is the buyer payoff, s = q.x - b the payment). The n(n-1) IC rows are
generated lazily: the first round holds the IC rows between covering pairs
and nearest neighbours, every later round adds the most violated rows of
the current optimum.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from revlab.bounds import guarantee_general, guarantee_regular
from revlab.config import (
    DEFAULT_SEED,
    IC_TOL,
    LP_BACKEND,
    MASS_TOL,
    MAX_SUPPORT_POINTS,
    ROWGEN_MAX_ROUNDS,
    ROWGEN_NEIGHBORS,
    ROWGEN_PURGE_FACTOR,
    ROWGEN_PURGE_SLACK,
    ROWGEN_ROWS_PER_POINT,
    ROWGEN_VIOLATION_TOL,
)
from revlab.distributions import FiniteAtoms
from revlab.errors import BadParamsError, DegenerateError, IterationLimitError
from revlab.mechanisms import GridAssignment, MenuMechanism, verify_ic_ir_npt
from revlab.simplex import SimplexTableau, solve_highs

logger = logging.getLogger(__name__)


# =============================================================================
# Finite joint valuations
# =============================================================================

@dataclass(eq=False)
class FiniteJoint:
    """Finite-support joint valuation (X1, X2) >= 0."""

    points: np.ndarray
    probs: np.ndarray
    independent: bool = False
    marginal_dists: tuple[FiniteAtoms, FiniteAtoms] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.probs = np.asarray(self.probs, dtype=float).ravel()
        if len(self.points) == 0 or len(self.points) != len(self.probs):
            raise BadParamsError("a joint needs matching, nonempty points and probs")
        if np.any(~np.isfinite(self.points)) or np.any(self.points < 0):
            raise BadParamsError("valuations must be finite and nonnegative")
        if np.any(self.probs <= 0):
            raise BadParamsError("probabilities must be positive")
        if abs(self.probs.sum() - 1.0) > MASS_TOL:
            raise BadParamsError(f"probabilities sum to {self.probs.sum()!r}, not 1")
        if len(np.unique(self.points, axis=0)) != len(self.points):
            raise BadParamsError("support points must be distinct; use from_points()")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def product(cls, d1: FiniteAtoms, d2: FiniteAtoms) -> FiniteJoint:
        if not (isinstance(d1, FiniteAtoms) and isinstance(d2, FiniteAtoms)):
            raise BadParamsError("product() takes FiniteAtoms marginals; discretize first")
        g1, g2 = np.meshgrid(d1.values, d2.values, indexing="ij")
        probs = np.outer(d1.probs, d2.probs).ravel()
        return cls(np.column_stack([g1.ravel(), g2.ravel()]), probs, True, (d1, d2))

    @classmethod
    def from_points(cls, points, probs) -> FiniteJoint:
        """Merge duplicate points and flag the joint independent if it is a product."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        probs = np.asarray(probs, dtype=float).ravel()
        uniq, inverse = np.unique(points, axis=0, return_inverse=True)
        merged = np.bincount(inverse.ravel(), weights=probs)
        keep = merged > 0
        joint = cls(uniq[keep], merged[keep])
        joint.independent = joint._looks_independent()
        return joint

    def _looks_independent(self) -> bool:
        m1, m2 = self.marginals()
        if len(m1.values) * len(m2.values) != len(self):
            return False
        i = np.searchsorted(m1.values, self.points[:, 0])
        k = np.searchsorted(m2.values, self.points[:, 1])
        return bool(np.allclose(self.probs, m1.probs[i] * m2.probs[k], rtol=0, atol=1e-12))

    def marginals(self) -> tuple[FiniteAtoms, FiniteAtoms]:
        if self.marginal_dists is not None:
            return self.marginal_dists
        return (FiniteAtoms(self.points[:, 0], self.probs),
                FiniteAtoms(self.points[:, 1], self.probs))

    @property
    def l1_max(self) -> float:
        return float(self.points.sum(axis=1).max())

    def scaled(self, c: float) -> FiniteJoint:
        if not (c > 0):
            raise BadParamsError("scale factor must be positive")
        if self.independent:
            m1, m2 = self.marginals()
            return FiniteJoint.product(FiniteAtoms(m1.values * c, m1.probs),
                                       FiniteAtoms(m2.values * c, m2.probs))
        return FiniteJoint(self.points * c, self.probs)

    def smoothed(self, eps: float, g: int = 2) -> FiniteJoint:
        """Discretized X + eps*U, U uniform on the unit square (g x g sub-points)."""
        if not (eps > 0) or g < 1:
            raise BadParamsError("smoothing needs eps > 0 and g >= 1")
        offsets = eps * (np.arange(g) + 0.5) / g
        if self.independent:
            m1, m2 = self.marginals()
            spread = [
                FiniteAtoms((m.values[:, None] + offsets[None, :]).ravel(),
                            np.repeat(m.probs, g) / g)
                for m in (m1, m2)
            ]
            return FiniteJoint.product(*spread)
        ox, oy = np.meshgrid(offsets, offsets, indexing="ij")
        shifts = np.column_stack([ox.ravel(), oy.ravel()])
        pts = (self.points[:, None, :] + shifts[None, :, :]).reshape(-1, 2)
        return FiniteJoint.from_points(pts, np.repeat(self.probs, g * g) / (g * g))

    def truncated(self, M: float) -> FiniteJoint:
        """X * 1{||X||_1 <= M}."""
        pts = self.points.copy()
        pts[pts.sum(axis=1) > M] = 0.0
        return FiniteJoint.from_points(pts, self.probs)


# =============================================================================
# LP solution
# =============================================================================

@dataclass
class OptRevSolution:
    value: float
    points: np.ndarray
    q: np.ndarray
    b: np.ndarray
    probs: np.ndarray
    status: str = "optimal"
    rounds: int = 0
    n_rows: int = 0
    iterations: int = 0

    @property
    def s(self) -> np.ndarray:
        return (self.q * self.points).sum(axis=1) - self.b

    def to_assignment(self) -> GridAssignment:
        return GridAssignment(self.points, self.q, self.s)

    def to_menu(self) -> MenuMechanism:
        return MenuMechanism.from_assignment(self.to_assignment())

    def table(self) -> pd.DataFrame:
        """Per-point dump: x1, x2, prob, q1, q2, s, b."""
        return pd.DataFrame({
            "x1": self.points[:, 0],
            "x2": self.points[:, 1],
            "prob": self.probs,
            "q1": self.q[:, 0],
            "q2": self.q[:, 1],
            "s": self.s,
            "b": self.b,
        })


def covering_pairs(points: np.ndarray) -> np.ndarray:
    """Pairs (k, l) with x_k <= x_l componentwise and nothing strictly between."""
    x = np.asarray(points, dtype=float)
    le = (x[:, None, 0] <= x[None, :, 0]) & (x[:, None, 1] <= x[None, :, 1])
    np.fill_diagonal(le, False)
    li = le.astype(np.int64)
    cover = le & ~((li @ li) > 0)
    return np.argwhere(cover)


class _RevenueLP:
    """Row builder for the revenue LP over variables [q1 | q2 | b]."""

    def __init__(self, joint: FiniteJoint, q_caps: tuple[float, float]):
        self.x = joint.points
        self.p = joint.probs
        self.n = len(joint)
        self.q_caps = q_caps
        n, x, p = self.n, self.x, self.p
        self.c = np.concatenate([p * x[:, 0], p * x[:, 1], -p])

    def _block(self, m: int) -> np.ndarray:
        return np.zeros((m, 3 * self.n))

    def cap_rows(self):
        n = self.n
        A = self._block(2 * n)
        A[np.arange(2 * n), np.arange(2 * n)] = 1.0
        h = np.concatenate([np.full(n, self.q_caps[0]), np.full(n, self.q_caps[1])])
        return A, h

    def ic_rows(self, pairs: np.ndarray):
        """b(x_k) - b(x_l) + q(x_k).(x_l - x_k) <= 0."""
        n, x = self.n, self.x
        k, l = pairs[:, 0], pairs[:, 1]
        r = np.arange(len(pairs))
        A = self._block(len(pairs))
        A[r, k] = x[l, 0] - x[k, 0]
        A[r, n + k] = x[l, 1] - x[k, 1]
        A[r, 2 * n + k] = 1.0
        A[r, 2 * n + l] = -1.0
        return A, np.zeros(len(pairs))

    def npt_rows(self):
        """b(x) - q(x).x <= 0."""
        n, x = self.n, self.x
        r = np.arange(n)
        A = self._block(n)
        A[r, r] = -x[:, 0]
        A[r, n + r] = -x[:, 1]
        A[r, 2 * n + r] = 1.0
        return A, np.zeros(n)

    def monotone_rows(self, pairs: np.ndarray):
        """s(x_k) - s(x_l) <= 0 for covering pairs x_k <= x_l."""
        n, x = self.n, self.x
        k, l = pairs[:, 0], pairs[:, 1]
        r = np.arange(len(pairs))
        A = self._block(len(pairs))
        A[r, k] = x[k, 0]
        A[r, n + k] = x[k, 1]
        A[r, 2 * n + k] = -1.0
        A[r, l] = -x[l, 0]
        A[r, n + l] = -x[l, 1]
        A[r, 2 * n + l] = 1.0
        return A, np.zeros(len(pairs))

    def split(self, v: np.ndarray):
        n = self.n
        return np.column_stack([v[:n], v[n:2 * n]]), v[2 * n:]

    def violations(self, q: np.ndarray, b: np.ndarray) -> np.ndarray:
        x = self.x
        V = q @ x.T - (q * x).sum(axis=1)[:, None] - b[None, :] + b[:, None]
        np.fill_diagonal(V, -np.inf)
        return V


def _initial_pairs(points: np.ndarray, full: bool) -> set[tuple[int, int]]:
    n = len(points)
    if full:
        return {(k, l) for k in range(n) for l in range(n) if k != l}
    pairs = set()
    for k, l in covering_pairs(points):
        pairs.add((int(k), int(l)))
        pairs.add((int(l), int(k)))
    if n > 1:
        dist = cdist(points, points, metric="cityblock")
        np.fill_diagonal(dist, np.inf)
        nearest = np.argsort(dist, axis=1)[:, :min(ROWGEN_NEIGHBORS, n - 1)]
        for k in range(n):
            for l in nearest[k]:
                pairs.add((k, int(l)))
                pairs.add((int(l), k))
    return pairs


def _purge_loose_rows(tableau: SimplexTableau, row_pairs: list, in_lp: np.ndarray) -> None:
    """Drop IC rows with clear slack once the LP holds many of them; they can come back."""
    ic = [i for i, p in enumerate(row_pairs) if p is not None]
    if len(ic) <= ROWGEN_PURGE_FACTOR * len(in_lp):
        return
    dropped = tableau.drop_rows(np.array(ic), min_slack=ROWGEN_PURGE_SLACK)
    if not len(dropped):
        return
    for i in dropped:
        in_lp[row_pairs[i]] = False
    gone = set(dropped.tolist())
    row_pairs[:] = [p for i, p in enumerate(row_pairs) if i not in gone]
    logger.debug("rev_lp: dropped %d slack IC rows", len(dropped))


def rev_lp(
    j: FiniteJoint,
    *,
    npt: bool = False,
    monotone: bool = False,
    q_caps: tuple[float, float] = (1.0, 1.0),
    full: bool = False,
    backend: str = LP_BACKEND,
    max_rounds: int = ROWGEN_MAX_ROUNDS,
) -> OptRevSolution:
    """
    Optimal revenue of a finite joint by LP with IC row generation.

    Args:
        j: Finite joint valuation (at most MAX_SUPPORT_POINTS points).
        npt: Add s(x) >= 0 rows (does not change the value).
        monotone: Add s(x_k) <= s(x_l) for covering pairs (MonRev).
        q_caps: Upper bounds on q1, q2 (lambda-constrained revenue).
        full: Start from every IC row instead of generating them.
        backend: "simplex" (built-in) or "highs" (scipy).
        max_rounds: Row-generation rounds before giving up.

    Returns:
        OptRevSolution with the value and the per-point (q, b).

    Raises:
        IterationLimitError: Pivot or round limit reached.
        DegenerateError: Numerical breakdown or a solution failing the IC check.
    """
    n = len(j)
    if n > MAX_SUPPORT_POINTS:
        raise BadParamsError(f"{n} support points exceed the limit of {MAX_SUPPORT_POINTS}")
    if not all(0 < cap <= 1 for cap in q_caps):
        raise BadParamsError(f"allocation caps must lie in (0, 1], got {q_caps}")
    if backend not in ("simplex", "highs"):
        raise BadParamsError(f"unknown LP backend {backend!r}")

    lp = _RevenueLP(j, q_caps)
    blocks = [lp.cap_rows()]
    if npt:
        blocks.append(lp.npt_rows())
    if monotone:
        covers = covering_pairs(j.points)
        if len(covers):
            blocks.append(lp.monotone_rows(covers))

    tableau = SimplexTableau(lp.c) if backend == "simplex" else None
    all_A, all_h = [], []
    row_pairs: list[tuple[int, int] | None] = []
    in_lp = np.zeros((n, n), dtype=bool)

    def push(A, h, pairs=None):
        if tableau is not None:
            tableau.add_rows(A, h)
        else:
            all_A.append(A)
            all_h.append(h)
        row_pairs.extend(pairs if pairs is not None else [None] * len(h))
        for k, l in pairs or ():
            in_lp[k, l] = True

    for A, h in blocks:
        push(A, h)
    first = sorted(_initial_pairs(j.points, full))
    if first:
        push(*lp.ic_rows(np.array(first)), first)

    scale = max(1.0, j.l1_max)
    for rounds in range(1, max_rounds + 1):
        if tableau is not None:
            result = tableau.solve()
        else:
            result = solve_highs(lp.c, np.vstack(all_A), np.concatenate(all_h))
        q, b = lp.split(result.x)
        V = lp.violations(q, b)
        missing = np.where(in_lp, -np.inf, V)
        worst, worst_missing = float(V.max()), float(missing.max())
        logger.debug("rev_lp round %d: value %.10g, worst IC violation %.3e (%d rows)",
                     rounds, result.value, worst, len(row_pairs))
        if worst_missing <= ROWGEN_VIOLATION_TOL:
            if worst > IC_TOL * scale:
                raise DegenerateError(f"IC rows present but violated by {worst:.3e}")
            break

        order = np.argsort(-missing, axis=1)[:, :ROWGEN_ROWS_PER_POINT]
        new_pairs = [(k, int(l)) for k in range(n) for l in order[k]
                     if missing[k, l] > ROWGEN_VIOLATION_TOL]
        if tableau is not None:
            _purge_loose_rows(tableau, row_pairs, in_lp)
        push(*lp.ic_rows(np.array(new_pairs)), new_pairs)
    else:
        raise IterationLimitError(f"row generation did not converge in {max_rounds} rounds")

    solution = OptRevSolution(
        value=float(np.dot(j.probs, (q * j.points).sum(axis=1) - b)),
        points=j.points,
        q=q,
        b=b,
        probs=j.probs,
        rounds=rounds,
        n_rows=int(in_lp.sum()),
        iterations=tableau.iterations if tableau is not None else result.iterations,
    )
    report = verify_ic_ir_npt(solution.to_assignment(), tol=IC_TOL * scale, npt=npt)
    if not report.ok:
        raise DegenerateError(
            f"LP solution fails {report.kind} check by {report.worst_violation:.3e} "
            f"at {report.witness}"
        )
    logger.info("rev_lp: value %.10g after %d rounds, %d IC rows",
                solution.value, rounds, int(in_lp.sum()))
    return solution


def monrev_lp(j: FiniteJoint, **kwargs) -> OptRevSolution:
    """Best revenue over mechanisms whose payment is nondecreasing on the support."""
    return rev_lp(j, monotone=True, **kwargs)


def srev(j: FiniteJoint) -> float:
    """Sum of the one-good Myerson revenues of the marginals."""
    m1, m2 = j.marginals()
    return m1.myerson_optimal().revenue + m2.myerson_optimal().revenue


def brev(j: FiniteJoint) -> float:
    """Best revenue from a single bundle price."""
    totals = j.points.sum(axis=1)
    prices = np.unique(totals)
    mass_at_least = np.array([j.probs[totals >= p].sum() for p in prices])
    return float((prices * mass_at_least).max())


# =============================================================================
# Ratio reports and scans
# =============================================================================

@dataclass
class RatioReport:
    srev: float
    rev: float
    monrev: float | None
    ratio: float
    guarantee: float | None
    slack: float | None
    independent: bool
    regular: bool = False
    solution: OptRevSolution | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "srev": self.srev,
            "rev": self.rev,
            "monrev": self.monrev,
            "ratio": self.ratio,
            "guarantee": self.guarantee,
            "slack": self.slack,
            "independent": self.independent,
            "regular": self.regular,
        }


def ratio_report(
    j: FiniteJoint,
    *,
    regular: bool = False,
    with_monrev: bool = True,
    backend: str = LP_BACKEND,
) -> RatioReport:
    """
    SRev / Rev against the applicable guarantee.

    The guarantee applies to independent goods only; `regular` (supplied by
    the caller) selects the stronger constant.
    """
    solution = rev_lp(j, backend=backend)
    rev = solution.value
    monrev = monrev_lp(j, backend=backend).value if with_monrev else None
    s = srev(j)
    ratio = s / rev if rev > 0 else 1.0
    if j.independent:
        guarantee = guarantee_regular() if regular else guarantee_general()
        slack = ratio - guarantee
    else:
        guarantee = slack = None
    return RatioReport(s, rev, monrev, ratio, guarantee, slack, j.independent, regular, solution)


@dataclass(frozen=True)
class ScanFamily:
    """
    Products of finite marginals drawn from a lattice.

    Each marginal has `n_values` distinct values from `values` with
    probabilities that are positive multiples of 1/prob_denominator.
    """

    n_values: int = 2
    values: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    prob_denominator: int = 4
    iid: bool = True

    def __post_init__(self) -> None:
        if self.n_values < 1 or self.n_values > len(self.values):
            raise BadParamsError("n_values must be between 1 and the lattice size")
        if self.prob_denominator < self.n_values:
            raise BadParamsError("prob_denominator must be at least n_values")
        if any(v < 0 for v in self.values):
            raise BadParamsError("lattice values must be nonnegative")

    def marginals(self) -> list[FiniteAtoms]:
        out = []
        den = self.prob_denominator
        for vals in itertools.combinations(sorted(set(self.values)), self.n_values):
            for cuts in itertools.combinations(range(1, den), self.n_values - 1):
                parts = np.diff([0, *cuts, den]) / den
                out.append(FiniteAtoms(vals, parts))
        return out


@dataclass
class ScanResult:
    best_ratio: float | None
    best_instance: dict | None
    trace: pd.DataFrame
    evaluated: int


def _fmt(arr) -> str:
    return "|".join(f"{v:.12g}" for v in arr)


def scan_worst_ratio(
    family: ScanFamily,
    budget: int,
    seed: int = DEFAULT_SEED,
    backend: str = LP_BACKEND,
) -> ScanResult:
    """
    Search a lattice family for the smallest SRev/Rev.

    The lattice is enumerated in a seeded random order; when it has more
    instances than the budget, a seeded sample of `budget` distinct instances
    is evaluated instead.
    """
    if budget < 0:
        raise BadParamsError("budget must be nonnegative")
    columns = ["index", "values1", "probs1", "values2", "probs2",
               "srev", "rev", "ratio", "best_so_far"]
    marginals = family.marginals()
    m = len(marginals)
    count = m if family.iid else m * m
    rng = np.random.default_rng(seed)
    take = min(budget, count)
    order = rng.permutation(count)[:take] if take else np.zeros(0, dtype=np.int64)

    rows = []
    best_ratio, best_instance = None, None
    for step, idx in enumerate(order):
        i, k = (int(idx), int(idx)) if family.iid else divmod(int(idx), m)
        d1, d2 = marginals[i], marginals[k]
        joint = FiniteJoint.product(d1, d2)
        rev = rev_lp(joint, backend=backend).value
        s = srev(joint)
        ratio = s / rev if rev > 0 else 1.0
        if best_ratio is None or ratio < best_ratio:
            best_ratio = ratio
            best_instance = {"good1": d1.to_dict(), "good2": d2.to_dict(),
                             "srev": s, "rev": rev, "ratio": ratio}
        rows.append({
            "index": step,
            "values1": _fmt(d1.values), "probs1": _fmt(d1.probs),
            "values2": _fmt(d2.values), "probs2": _fmt(d2.probs),
            "srev": s, "rev": rev, "ratio": ratio, "best_so_far": best_ratio,
        })
        logger.debug("scan %d/%d: ratio %.6f (best %.6f)", step + 1, take, ratio, best_ratio)

    trace = pd.DataFrame(rows, columns=columns)
    return ScanResult(best_ratio, best_instance, trace, len(rows))

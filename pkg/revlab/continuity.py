"""
Prohorov distance between finite measures (l1 ground metric) and the
revenue-continuity experiments built on it.

Feasibility of a radius rho reduces to a bipartite max-flow: mu-points
connect to nu-points closer than rho, and rho is feasible iff at least
1 - rho of the mass can be transported. The bipartite graph is symmetric, so
the same flow value decides both directions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow
from scipy.spatial.distance import cdist

from revlab.config import FLOW_SCALE, LP_BACKEND, MASS_TOL, PROHOROV_EDGE_SLACK, PROHOROV_TOL
from revlab.errors import BadParamsError, DimMismatchError
from revlab.mechanisms import MenuMechanism, discount, revenue
from revlab.optrev import FiniteJoint, rev_lp

logger = logging.getLogger(__name__)


# =============================================================================
# Measures
# =============================================================================

@dataclass(eq=False)
class DiscreteMeasureKD:
    """Finite probability measure on the nonnegative orthant of R^k."""

    points: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        self.points = pts.reshape(len(pts), -1) if pts.ndim != 1 else pts.reshape(-1, 1)
        self.probs = np.asarray(self.probs, dtype=float).ravel()
        if len(self.points) == 0 or len(self.points) != len(self.probs):
            raise BadParamsError("a measure needs matching, nonempty points and probs")
        if np.any(self.points < 0) or np.any(~np.isfinite(self.points)):
            raise BadParamsError("coordinates must be finite and nonnegative")
        if np.any(self.probs <= 0) or abs(self.probs.sum() - 1.0) > MASS_TOL:
            raise BadParamsError("probabilities must be positive and sum to 1")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def dirac(cls, x) -> DiscreteMeasureKD:
        return cls(np.atleast_2d(np.asarray(x, dtype=float)), [1.0])

    @classmethod
    def from_joint(cls, j: FiniteJoint) -> DiscreteMeasureKD:
        return cls(j.points, j.probs)


def as_measure(x: DiscreteMeasureKD | FiniteJoint) -> DiscreteMeasureKD:
    return x if isinstance(x, DiscreteMeasureKD) else DiscreteMeasureKD.from_joint(x)


@dataclass(frozen=True)
class ProhorovCertificate:
    """
    Witnesses bracketing the distance.

    At rho_upper the flow moves `transported_upper >= 1 - rho_upper` in
    either direction. At rho_lower the min cut gives a set A of mu-points with
    mu(A) > nu(B_rho(A)) + rho_lower.
    """

    rho_upper: float
    transported_upper: float
    rho_lower: float
    transported_lower: float
    violating_set: tuple[int, ...]
    violating_mass: float
    neighborhood_mass: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violating_set"] = list(self.violating_set)
        return d


@dataclass(frozen=True)
class ProhorovResult:
    distance: float
    certificate: ProhorovCertificate

    def to_dict(self) -> dict:
        return {"distance": self.distance, "certificate": self.certificate.to_dict()}


# =============================================================================
# Prohorov distance
# =============================================================================

class _FlowProblem:
    """Bipartite transport network: source -> mu -> nu -> sink."""

    def __init__(self, mu: DiscreteMeasureKD, nu: DiscreteMeasureKD):
        self.mu, self.nu = mu, nu
        self.n, self.m = len(mu), len(nu)
        self.dist = cdist(mu.points, nu.points, metric="cityblock")
        self.cap_mu = np.rint(mu.probs * FLOW_SCALE).astype(np.int64)
        self.cap_nu = np.rint(nu.probs * FLOW_SCALE).astype(np.int64)
        # rounding of each capacity moves at most half a unit
        self.slack = (self.n + self.m) / FLOW_SCALE

    def _network(self, rho: float) -> csr_matrix:
        n, m = self.n, self.m
        size = n + m + 2
        src, sink = 0, size - 1
        inner = int(max(self.cap_mu.sum(), self.cap_nu.sum()))
        ii, jj = np.nonzero(self.dist < rho - PROHOROV_EDGE_SLACK)
        rows = np.concatenate([np.full(n, src), 1 + ii, 1 + n + np.arange(m)])
        cols = np.concatenate([1 + np.arange(n), 1 + n + jj, np.full(m, sink)])
        caps = np.concatenate([self.cap_mu, np.full(len(ii), inner), self.cap_nu])
        return csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(size, size))

    def solve(self, rho: float):
        """(transported mass, residual-reachable node set)."""
        graph = self._network(rho)
        res = maximum_flow(graph, 0, graph.shape[0] - 1)
        residual = graph.toarray().astype(np.int64) - res.flow.toarray().astype(np.int64)
        reach = breadth_first_order(csr_matrix((residual > 0).astype(float)), 0, directed=True,
                                    return_predecessors=False)
        return res.flow_value / FLOW_SCALE, set(int(v) for v in reach)

    def feasible(self, rho: float, transported: float) -> bool:
        return transported >= 1.0 - rho - self.slack


def prohorov(
    mu: DiscreteMeasureKD | FiniteJoint,
    nu: DiscreteMeasureKD | FiniteJoint,
    tol: float = PROHOROV_TOL,
) -> ProhorovResult:
    """Prohorov distance by binary search on rho with a max-flow feasibility test."""
    mu, nu = as_measure(mu), as_measure(nu)
    if mu.dim != nu.dim:
        raise DimMismatchError(f"dimensions differ: {mu.dim} vs {nu.dim}")
    problem = _FlowProblem(mu, nu)

    lo, hi = 0.0, 1.0
    lo_flow, lo_reach = problem.solve(lo)
    hi_flow, _ = problem.solve(hi)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        flow, reach = problem.solve(mid)
        if problem.feasible(mid, flow):
            hi, hi_flow = mid, flow
        else:
            lo, lo_flow, lo_reach = mid, flow, reach
    logger.debug("prohorov: bracket [%.9g, %.9g] after binary search", lo, hi)

    violating = tuple(sorted(v - 1 for v in lo_reach if 1 <= v <= problem.n))
    near = np.flatnonzero(
        np.any(problem.dist[list(violating)] < lo - PROHOROV_EDGE_SLACK, axis=0)
    ) if violating else np.zeros(0, dtype=np.int64)
    certificate = ProhorovCertificate(
        rho_upper=hi,
        transported_upper=hi_flow,
        rho_lower=lo,
        transported_lower=lo_flow,
        violating_set=violating,
        violating_mass=float(mu.probs[list(violating)].sum()) if violating else 0.0,
        neighborhood_mass=float(nu.probs[near].sum()),
    )
    return ProhorovResult(distance=hi, certificate=certificate)


def revenue_continuity_bound(M: float, dist: float) -> float:
    """(2M + 1) sqrt(dist)."""
    if M < 1:
        raise BadParamsError(f"M must be at least 1, got {M}")
    if not (0 <= dist <= 1):
        raise BadParamsError(f"a Prohorov distance lies in [0, 1], got {dist}")
    return (2 * M + 1) * math.sqrt(dist)


def tail_norm_mass(X: FiniteJoint, M: float) -> float:
    """E[||X||_1 ; ||X||_1 > M]."""
    norms = X.points.sum(axis=1)
    return float(np.dot(X.probs, np.where(norms > M, norms, 0.0)))


# =============================================================================
# Experiments
# =============================================================================

@dataclass(frozen=True)
class ContinuityExperiment:
    rev_x: float
    rev_y: float
    gap: float
    distance: float
    bound: float
    ok: bool
    in_contract: bool

    def to_dict(self) -> dict:
        return asdict(self)


def continuity_experiment(
    X: FiniteJoint,
    Y: FiniteJoint,
    M: float,
    backend: str = LP_BACKEND,
) -> ContinuityExperiment:
    """
    Compare |Rev(X) - Rev(Y)| with (2M+1) sqrt(Prohorov(X, Y)).

    Supports with some ||x||_1 > M are out of contract: the comparison is still
    reported but `ok` carries no promise there.
    """
    in_contract = max(X.l1_max, Y.l1_max) <= M + 1e-12
    if not in_contract:
        logger.warning("supports exceed ||x||_1 <= %g; continuity bound does not apply", M)
    rev_x = rev_lp(X, backend=backend).value
    rev_y = rev_lp(Y, backend=backend).value
    distance = prohorov(X, Y).distance
    bound = revenue_continuity_bound(M, distance)
    gap = abs(rev_x - rev_y)
    return ContinuityExperiment(rev_x, rev_y, gap, distance, bound, gap <= bound + 1e-8, in_contract)


@dataclass(frozen=True)
class DiscountTransfer:
    rho: float
    alpha: float
    rev_x: float
    rev_y_discounted: float
    floor: float
    ok: bool


def discount_transfer(m: MenuMechanism, X: FiniteJoint, Y: FiniteJoint, M: float) -> DiscountTransfer:
    """
    Carry a menu from X to a nearby Y: discounting every payment by sqrt(rho)
    keeps Y-revenue above Rev_m(X) - (2M+1) sqrt(rho).
    """
    rho = prohorov(X, Y).distance
    alpha = min(math.sqrt(rho), 1.0 - 1e-12)
    rev_x = revenue(m, X)
    rev_y = revenue(discount(m, alpha), Y)
    floor = rev_x - revenue_continuity_bound(M, rho)
    return DiscountTransfer(rho, alpha, rev_x, rev_y, floor, rev_y >= floor - 1e-9)


@dataclass
class ConvergenceTrace:
    mode: str
    reference: float
    levels: list[float]
    revenues: list[float]
    extra: dict[str, list[float]] = field(default_factory=dict)

    @property
    def gaps(self) -> list[float]:
        return [abs(r - self.reference) for r in self.revenues]

    @property
    def monotone(self) -> bool:
        return all(b >= a - 1e-9 for a, b in zip(self.revenues, self.revenues[1:]))

    @property
    def slope(self) -> float:
        """Log-log slope of the gap against the level; nan with fewer than two positive gaps."""
        lv = np.array(self.levels, dtype=float)
        gp = np.array(self.gaps)
        keep = (gp > 1e-12) & (lv > 0)
        if keep.sum() < 2:
            return math.nan
        return float(np.polyfit(np.log(lv[keep]), np.log(gp[keep]), 1)[0])

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame({"level": self.levels, "revenue": self.revenues, "gap": self.gaps})
        for name, values in self.extra.items():
            df[name] = values
        return df


def convergence_trace(
    X: FiniteJoint,
    mode: str,
    levels,
    g: int = 2,
    backend: str = LP_BACKEND,
) -> ConvergenceTrace:
    """
    Revenues along a truncation (M increasing) or smoothing (eps decreasing)
    sequence converging to X.
    """
    if mode not in ("truncate", "smooth"):
        raise BadParamsError(f"mode must be 'truncate' or 'smooth', got {mode!r}")
    levels = [float(v) for v in levels]
    reference = rev_lp(X, backend=backend).value
    revenues: list[float] = []
    extra: dict[str, list[float]] = {}

    if mode == "truncate":
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise BadParamsError("truncation levels must be nondecreasing")
        extra["tail_norm_mass"] = []
        for M in levels:
            revenues.append(rev_lp(X.truncated(M), backend=backend).value)
            extra["tail_norm_mass"].append(tail_norm_mass(X, M))
    else:
        if any(b > a for a, b in zip(levels, levels[1:])):
            raise BadParamsError("smoothing levels must be nonincreasing")
        extra["distance"], extra["bound"] = [], []
        for eps in levels:
            Y = X.smoothed(eps, g)
            revenues.append(rev_lp(Y, backend=backend).value)
            distance = prohorov(X, Y).distance
            extra["distance"].append(distance)
            extra["bound"].append(revenue_continuity_bound(max(1.0, Y.l1_max), distance))

    trace = ConvergenceTrace(mode, reference, levels, revenues, extra)
    logger.info("%s trace: %s (reference %.6g)", mode, ", ".join(f"{r:.6g}" for r in revenues), reference)
    return trace

"""
Menu mechanisms for two goods.

A mechanism is a finite menu of (q1, q2, s) options; the buyer with values
x picks a payoff-maximizing option, breaking ties toward the highest payment
and then the lowest index (seller-favorable). Everything the buyer is
assigned - allocation q(x), payment s(x), payoff b(x) - follows from that
choice, so menus are IC, IR and NPT by construction once the null option is
on the menu.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from revlab.config import IC_TOL, TIE_RTOL
from revlab.errors import BadParamsError, QOutOfRangeError

if TYPE_CHECKING:
    from revlab.optrev import FiniteJoint

logger = logging.getLogger(__name__)


# =============================================================================
# Types
# =============================================================================

@dataclass(frozen=True, eq=False)
class MenuMechanism:
    """Finite menu of (q1, q2, s) options; the null option is always present."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float).reshape(-1, 3)
        q = e[:, :2]
        if np.any(q < -1e-12) or np.any(q > 1 + 1e-12):
            raise BadParamsError("menu allocations must lie in [0, 1]")
        e = e.copy()
        e[:, :2] = np.clip(q, 0.0, 1.0)
        if not np.any(np.all(e == 0.0, axis=1)):
            e = np.vstack([np.zeros((1, 3)), e])
        object.__setattr__(self, "entries", e)

    @property
    def q(self) -> np.ndarray:
        return self.entries[:, :2]

    @property
    def s(self) -> np.ndarray:
        return self.entries[:, 2]

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_assignment(cls, g: GridAssignment) -> MenuMechanism:
        """Menu listing every (q, s) the assignment uses (taxation principle)."""
        rows = np.column_stack([g.q, g.s]) if len(g) else np.zeros((0, 3))
        return cls(np.unique(rows, axis=0) if len(rows) else rows)


@dataclass
class GridAssignment:
    """Per-point allocation and payment on a finite set of valuations."""

    points: np.ndarray
    q: np.ndarray
    s: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.q = np.asarray(self.q, dtype=float).reshape(-1, 2)
        self.s = np.asarray(self.s, dtype=float).ravel()
        if not (len(self.points) == len(self.q) == len(self.s)):
            raise BadParamsError("points, q and s must have the same length")

    @classmethod
    def from_payoffs(cls, points, q, b) -> GridAssignment:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        q = np.asarray(q, dtype=float).reshape(-1, 2)
        s = (q * points).sum(axis=1) - np.asarray(b, dtype=float).ravel()
        return cls(points, q, s)

    @property
    def b(self) -> np.ndarray:
        """Buyer payoff q(x).x - s(x)."""
        return (self.q * self.points).sum(axis=1) - self.s

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class IcReport:
    ok: bool
    worst_violation: float
    witness: tuple[int, int] | None = None
    kind: str | None = None     # "ic", "ir" or "npt"


@dataclass
class DiagonalProfile:
    t: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    Phi: np.ndarray = field(repr=False)


# =============================================================================
# Buyer behaviour
# =============================================================================

def best_responses(m: MenuMechanism, points) -> np.ndarray:
    """Vectorized best_response over an (n, 2) array of valuations."""
    x = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(x) == 0:
        return np.zeros(0, dtype=np.int64)
    value = x @ m.q.T
    payoff = value - m.s[None, :]
    # relative window, so the choice is invariant to rescaling money and values together
    scale = np.abs(value).max(axis=1) + np.abs(m.s).max()
    best = payoff.max(axis=1)
    candidates = payoff >= (best - TIE_RTOL * scale)[:, None]
    score = np.where(candidates, m.s[None, :], -np.inf)
    return np.argmax(score, axis=1)


def best_response(m: MenuMechanism, x) -> int:
    """Index of the option chosen by a buyer with values x."""
    return int(best_responses(m, np.asarray(x, dtype=float).reshape(1, 2))[0])


def assignment_from_menu(m: MenuMechanism, points) -> GridAssignment:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    idx = best_responses(m, points)
    return GridAssignment(points, m.q[idx], m.s[idx])


# =============================================================================
# Verification and revenue
# =============================================================================

def verify_ic_ir_npt(g: GridAssignment, tol: float = IC_TOL, *, npt: bool = True) -> IcReport:
    """
    Check b(y) - b(x) >= q(x).(y - x) for all ordered pairs, b >= 0 and
    (unless npt is False) s >= 0.

    Returns:
        IcReport with the largest violation found (0 when everything holds
        strictly) and the offending pair or point.
    """
    n = len(g)
    if n == 0:
        return IcReport(ok=True, worst_violation=0.0)

    x, q, b, s = g.points, g.q, g.b, g.s
    # V[k, l] = q(x_k).(x_l - x_k) - (b(x_l) - b(x_k))
    V = q @ x.T - (q * x).sum(axis=1)[:, None] - b[None, :] + b[:, None]
    np.fill_diagonal(V, -np.inf)

    worst, witness, kind = 0.0, None, None
    if n > 1:
        k, l = np.unravel_index(int(np.argmax(V)), V.shape)
        if V[k, l] > worst:
            worst, witness, kind = float(V[k, l]), (int(k), int(l)), "ic"
    k = int(np.argmin(b))
    if -b[k] > worst:
        worst, witness, kind = float(-b[k]), (k, k), "ir"
    k = int(np.argmin(s))
    if npt and -s[k] > worst:
        worst, witness, kind = float(-s[k]), (k, k), "npt"

    return IcReport(ok=worst <= tol, worst_violation=worst, witness=witness, kind=kind)


def revenue(m: MenuMechanism, j: FiniteJoint) -> float:
    """Expected payment E[s(X)] under the finite joint j."""
    idx = best_responses(m, j.points)
    return float(np.dot(j.probs, m.s[idx]))


# =============================================================================
# Transforms and standard menus
# =============================================================================

def rescale(m: MenuMechanism, lambda1: float, lambda2: float) -> MenuMechanism:
    """Change of units: (q1, q2, s) -> (q1/lambda1, q2/lambda2, s)."""
    lam = np.array([lambda1, lambda2], dtype=float)
    if np.any(lam <= 0) or np.any(lam > 1):
        raise BadParamsError(f"lambdas must lie in (0, 1], got {tuple(lam)}")
    if np.any(m.q > lam[None, :] + 1e-12):
        raise QOutOfRangeError(f"some allocation exceeds lambda = {tuple(lam)}")
    e = m.entries.copy()
    e[:, :2] = np.minimum(e[:, :2] / lam[None, :], 1.0)
    return MenuMechanism(e)


def discount(m: MenuMechanism, alpha: float) -> MenuMechanism:
    """Lower every payment by the factor 1 - alpha; the buyer re-optimizes."""
    if not (0 <= alpha < 1):
        raise BadParamsError(f"discount needs 0 <= alpha < 1, got {alpha}")
    e = m.entries.copy()
    e[:, 2] *= 1.0 - alpha
    return MenuMechanism(e)


def separate_posted(p1: float, p2: float) -> MenuMechanism:
    if p1 < 0 or p2 < 0:
        raise BadParamsError("prices must be nonnegative")
    return MenuMechanism([[0, 0, 0], [1, 0, p1], [0, 1, p2], [1, 1, p1 + p2]])


def bundle_posted(p: float) -> MenuMechanism:
    if p < 0:
        raise BadParamsError("price must be nonnegative")
    return MenuMechanism([[0, 0, 0], [1, 1, p]])


def diagonal_profile(m: MenuMechanism, t_grid) -> DiagonalProfile:
    """Sample q1, q2 and the payoff b along the diagonal x = (t, t)."""
    t = np.asarray(t_grid, dtype=float).ravel()
    diag = np.column_stack([t, t])
    idx = best_responses(m, diag)
    q = m.q[idx]
    Phi = (q * diag).sum(axis=1) - m.s[idx]
    return DiagonalProfile(t=t, phi1=q[:, 0], phi2=q[:, 1], Phi=Phi)


def constrained_revenue_bound(m: MenuMechanism, x0: float, lam: float, rev: float) -> float:
    """
    Upper bound (lam - q(x0)) * rev + s(x0) on the revenue of a one-good menu
    whose allocations never exceed lam, for values supported on [x0, inf).

    Only the first good is read; the menu is evaluated at (x, 0).
    """
    k = best_response(m, (x0, 0.0))
    return (lam - m.q[k, 0]) * rev + m.s[k]

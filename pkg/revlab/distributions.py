"""
One-dimensional valuation distributions.

Every distribution exposes the tail G(t) = P[X >= t] (atoms at t count),
the cumulative tail H(t) = E[min{X, t}], the absolutely continuous density
part and its point masses. Representations:

    FiniteAtoms       finitely many (value, prob) pairs
    PiecewiseUniform  constant density on consecutive cells
    Uniform           PiecewiseUniform with a single cell
    Exponential       rate, optional cap (mass above the cap sits at the cap)
    EqualRevenue      tail min{r/t, 1} up to a cap, atom r/cap at the cap
    Truncated         X * 1{X <= M} for a non-atomic base
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from revlab.config import (
    MASS_TOL,
    MYERSON_SCAN_POINTS,
    MYERSON_TIE_TOL,
    REGULARITY_GRID_N,
    REGULARITY_TOL,
    TAU_TOL,
)
from revlab.errors import (
    BadParamsError,
    NoDensityError,
    UnreachableError,
    UnsupportedRepresentationError,
    ZeroDensityError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MyersonSolution:
    """Optimal posted price for one good and the revenue it earns."""

    price: float
    revenue: float


def _pick_smallest_optimizer(prices, revenues) -> MyersonSolution:
    order = np.argsort(prices, kind="stable")
    prices = np.asarray(prices, dtype=float)[order]
    revenues = np.asarray(revenues, dtype=float)[order]
    best = float(revenues.max())
    threshold = best - MYERSON_TIE_TOL * max(best, 1e-300)
    idx = int(np.argmax(revenues >= threshold))
    return MyersonSolution(price=float(prices[idx]), revenue=float(revenues[idx]))


# =============================================================================
# Base class
# =============================================================================

class Dist1D(ABC):
    """A valuation distribution on [0, inf)."""

    kind: str = ""
    has_density: bool = True

    @abstractmethod
    def tail(self, t: float) -> float:
        """G(t) = P[X >= t]."""

    @abstractmethod
    def survival(self, t: float) -> float:
        """P[X > t]."""

    @abstractmethod
    def cumtail(self, t: float) -> float:
        """H(t) = integral of G over [0, t]."""

    @abstractmethod
    def density(self, t: float) -> float:
        """Absolutely continuous part of the density, right-continuous."""

    @property
    @abstractmethod
    def lower(self) -> float: ...

    @property
    @abstractmethod
    def upper(self) -> float: ...

    @abstractmethod
    def breakpoints(self) -> tuple[float, ...]: ...

    @abstractmethod
    def params(self) -> dict: ...

    def atoms(self) -> list[tuple[float, float]]:
        return []

    def cdf(self, t: float) -> float:
        return 1.0 - self.survival(t)

    def mean(self) -> float:
        if not math.isfinite(self.upper):
            raise BadParamsError(f"{self.kind}: mean needs a finite support")
        return self.cumtail(self.upper)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}

    def myerson_optimal(self) -> MyersonSolution:
        """Candidate prices (breakpoints, atoms) plus a bracketed scan per cell."""
        hi = self.upper
        if not math.isfinite(hi):
            raise BadParamsError(f"{self.kind}: generic pricing needs a finite support")
        knots = sorted({0.0, self.lower, hi, *self.breakpoints(), *(v for v, _ in self.atoms())})
        knots = [k for k in knots if 0.0 <= k <= hi]
        candidates = list(knots)
        candidates.extend(np.linspace(0.0, hi, MYERSON_SCAN_POINTS).tolist())

        def objective(p: float) -> float:
            return -p * self.tail(p)

        for lo, up in zip(knots[:-1], knots[1:]):
            if up - lo <= 0:
                continue
            res = minimize_scalar(objective, bounds=(lo, up), method="bounded",
                                  options={"xatol": 1e-12})
            candidates.append(float(res.x))

        prices = np.array(candidates)
        revenues = np.array([p * self.tail(p) for p in prices])
        return _pick_smallest_optimizer(prices, revenues)

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    __hash__ = None

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"


# =============================================================================
# Representations
# =============================================================================

class FiniteAtoms(Dist1D):
    kind = "atoms"
    has_density = False

    def __init__(self, values, probs):
        v = np.asarray(values, dtype=float).ravel()
        p = np.asarray(probs, dtype=float).ravel()
        if v.size == 0 or v.size != p.size:
            raise BadParamsError("atoms need matching, nonempty values and probs")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise BadParamsError("atom values must be finite and nonnegative")
        if np.any(p <= 0) or np.any(p > 1 + MASS_TOL):
            raise BadParamsError("atom probabilities must lie in (0, 1]")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise BadParamsError(f"atom probabilities sum to {p.sum()!r}, not 1")

        uniq, inverse = np.unique(v, return_inverse=True)
        self.values = uniq
        self.probs = np.bincount(inverse, weights=p)
        self._suffix = np.concatenate([np.cumsum(self.probs[::-1])[::-1], [0.0]])

    def tail(self, t):
        return float(self._suffix[np.searchsorted(self.values, t, side="left")])

    def survival(self, t):
        return float(self._suffix[np.searchsorted(self.values, t, side="right")])

    def cumtail(self, t):
        return float(np.dot(self.probs, np.minimum(self.values, max(t, 0.0))))

    def density(self, t):
        raise NoDensityError("FiniteAtoms has no density")

    def mean(self):
        return float(np.dot(self.probs, self.values))

    @property
    def lower(self):
        return float(self.values[0])

    @property
    def upper(self):
        return float(self.values[-1])

    def breakpoints(self):
        return tuple(self.values.tolist())

    def atoms(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def params(self):
        return {"values": self.values.tolist(), "probs": self.probs.tolist()}

    def myerson_optimal(self):
        return _pick_smallest_optimizer(self.values, self.values * self._suffix[:-1])


class PiecewiseUniform(Dist1D):
    kind = "piecewise"

    def __init__(self, breakpoints, densities):
        x = np.asarray(breakpoints, dtype=float).ravel()
        c = np.asarray(densities, dtype=float).ravel()
        if x.size < 2 or c.size != x.size - 1:
            raise BadParamsError("piecewise needs k+1 breakpoints for k densities")
        if np.any(~np.isfinite(x)) or x[0] < 0:
            raise BadParamsError("breakpoints must be finite and nonnegative")
        if np.any(np.diff(x) <= 0):
            raise BadParamsError("breakpoints must be strictly increasing")
        if np.any(c < 0) or np.any(~np.isfinite(c)):
            raise BadParamsError("densities must be finite and nonnegative")
        widths = np.diff(x)
        masses = c * widths
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise BadParamsError(f"densities integrate to {masses.sum()!r}, not 1")

        self.x = x
        self.c = c
        # G and H at the breakpoints; G is linear and H quadratic inside a cell.
        self._G = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
        self._H = np.concatenate([[x[0]], x[0] + np.cumsum((self._G[:-1] + self._G[1:]) / 2 * widths)])

    def _cell(self, t: float) -> int:
        return int(np.searchsorted(self.x, t, side="right")) - 1

    def tail(self, t):
        if t <= self.x[0]:
            return 1.0
        if t >= self.x[-1]:
            return 0.0
        k = self._cell(t)
        return float(max(self._G[k] - self.c[k] * (t - self.x[k]), 0.0))

    def survival(self, t):
        return self.tail(t) if t >= 0 else 1.0

    def cumtail(self, t):
        if t <= self.x[0]:
            return max(t, 0.0)
        if t >= self.x[-1]:
            return float(self._H[-1])
        k = self._cell(t)
        return float(self._H[k] + (t - self.x[k]) * (self._G[k] + self.tail(t)) / 2)

    def density(self, t):
        if t < self.x[0] or t >= self.x[-1]:
            return 0.0
        return float(self.c[self._cell(t)])

    def mean(self):
        return float(self._H[-1])

    @property
    def lower(self):
        return float(self.x[0])

    @property
    def upper(self):
        return float(self.x[-1])

    def breakpoints(self):
        return tuple(self.x.tolist())

    def params(self):
        return {"breakpoints": self.x.tolist(), "densities": self.c.tolist()}

    def myerson_optimal(self):
        # p * G(p) is a concave quadratic on each cell
        prices = list(self.x)
        for k, c in enumerate(self.c):
            if c <= 0:
                continue
            p = (self._G[k] + c * self.x[k]) / (2 * c)
            if self.x[k] < p < self.x[k + 1]:
                prices.append(p)
        prices = np.array(prices)
        revenues = np.array([p * self.tail(p) for p in prices])
        return _pick_smallest_optimizer(prices, revenues)


class Uniform(PiecewiseUniform):
    kind = "uniform"

    def __init__(self, low: float, high: float):
        if not (0 <= low < high) or not math.isfinite(high):
            raise BadParamsError(f"uniform needs 0 <= low < high, got ({low}, {high})")
        self.low = float(low)
        self.high = float(high)
        super().__init__([self.low, self.high], [1.0 / (self.high - self.low)])

    def params(self):
        return {"low": self.low, "high": self.high}


class Exponential(Dist1D):
    kind = "exponential"

    def __init__(self, rate: float, cap: float | None = None):
        if not (rate > 0 and math.isfinite(rate)):
            raise BadParamsError(f"exponential rate must be positive, got {rate}")
        if cap is not None and not (cap > 0):
            raise BadParamsError(f"exponential cap must be positive, got {cap}")
        self.rate = float(rate)
        self.cap = math.inf if cap is None else float(cap)

    def tail(self, t):
        if t <= 0:
            return 1.0
        if t > self.cap:
            return 0.0
        return math.exp(-self.rate * t)

    def survival(self, t):
        if t < 0:
            return 1.0
        if t >= self.cap:
            return 0.0
        return math.exp(-self.rate * t)

    def cumtail(self, t):
        s = min(max(t, 0.0), self.cap)
        return -math.expm1(-self.rate * s) / self.rate

    def density(self, t):
        if t < 0 or t >= self.cap:
            return 0.0
        return self.rate * math.exp(-self.rate * t)

    def atoms(self):
        if math.isfinite(self.cap):
            return [(self.cap, math.exp(-self.rate * self.cap))]
        return []

    def mean(self):
        return self.cumtail(self.cap) if math.isfinite(self.cap) else 1.0 / self.rate

    @property
    def lower(self):
        return 0.0

    @property
    def upper(self):
        return self.cap

    def breakpoints(self):
        return (0.0, self.cap) if math.isfinite(self.cap) else (0.0,)

    def params(self):
        return {"rate": self.rate, "cap": self.cap if math.isfinite(self.cap) else None}

    def myerson_optimal(self):
        p = min(1.0 / self.rate, self.cap)
        return MyersonSolution(price=p, revenue=p * self.tail(p))


class EqualRevenue(Dist1D):
    """Tail min{r/t, 1} on [0, cap]; every price in [r, cap] earns exactly r."""

    kind = "equal_revenue"

    def __init__(self, r: float, cap: float):
        if not (0 < r < cap) or not math.isfinite(cap):
            raise BadParamsError(f"equal_revenue needs 0 < r < cap < inf, got ({r}, {cap})")
        self.r = float(r)
        self.cap = float(cap)

    def tail(self, t):
        if t <= self.r:
            return 1.0
        if t <= self.cap:
            return self.r / t
        return 0.0

    def survival(self, t):
        if t < self.r:
            return 1.0
        if t < self.cap:
            return self.r / t
        return 0.0

    def cumtail(self, t):
        if t <= self.r:
            return max(t, 0.0)
        return self.r + self.r * math.log(min(t, self.cap) / self.r)

    def density(self, t):
        if self.r <= t < self.cap:
            return self.r / (t * t)
        return 0.0

    def atoms(self):
        return [(self.cap, self.r / self.cap)]

    def mean(self):
        return self.cumtail(self.cap)

    @property
    def lower(self):
        return self.r

    @property
    def upper(self):
        return self.cap

    def breakpoints(self):
        return (self.r, self.cap)

    def params(self):
        return {"r": self.r, "cap": self.cap}

    def myerson_optimal(self):
        return MyersonSolution(price=self.r, revenue=self.r)


class Truncated(Dist1D):
    """X * 1{X <= M}: the mass above M moves to 0."""

    kind = "truncated"

    def __init__(self, base: Dist1D, M: float):
        if not (M > 0):
            raise BadParamsError(f"truncation level must be positive, got {M}")
        self.base = base
        self.M = float(M)
        self.has_density = base.has_density
        self._moved = base.survival(self.M)

    def tail(self, t):
        if t <= 0:
            return 1.0
        if t > self.M:
            return 0.0
        return max(self.base.tail(t) - self._moved, 0.0)

    def survival(self, t):
        if t < 0:
            return 1.0
        if t >= self.M:
            return 0.0
        return max(self.base.survival(t) - self._moved, 0.0)

    def cumtail(self, t):
        s = min(max(t, 0.0), self.M)
        return self.base.cumtail(s) - s * self._moved

    def density(self, t):
        if t < 0 or t >= self.M:
            return 0.0
        return self.base.density(t)

    def atoms(self):
        merged: dict[float, float] = {}
        for v, m in self.base.atoms():
            if v <= self.M:
                merged[v] = merged.get(v, 0.0) + m
        if self._moved > 0:
            merged[0.0] = merged.get(0.0, 0.0) + self._moved
        return sorted(merged.items())

    def mean(self):
        return self.cumtail(self.M)

    @property
    def lower(self):
        return 0.0 if self._moved > 0 else self.base.lower

    @property
    def upper(self):
        return min(self.M, self.base.upper)

    def breakpoints(self):
        pts = {0.0, self.upper, *(p for p in self.base.breakpoints() if p <= self.M)}
        return tuple(sorted(pts))

    def params(self):
        return {"base": self.base.to_dict(), "M": self.M}


# =============================================================================
# Operations
# =============================================================================

def cdf(d: Dist1D, t: float) -> float:
    """P[X <= t]."""
    return d.cdf(t)


def tail(d: Dist1D, t: float) -> float:
    """G(t) = P[X >= t]."""
    return d.tail(t)


def survival(d: Dist1D, t: float) -> float:
    return d.survival(t)


def cumtail(d: Dist1D, t: float) -> float:
    """H(t) = E[min{X, t}]."""
    return d.cumtail(t)


def density(d: Dist1D, t: float) -> float:
    return d.density(t)


def mean(d: Dist1D) -> float:
    return d.mean()


def myerson_optimal(d: Dist1D) -> MyersonSolution:
    """Revenue-maximizing posted price, smallest optimizer on ties."""
    return d.myerson_optimal()


def virtual_value(d: Dist1D, t: float) -> float:
    """t - G(t)/f(t)."""
    if not d.has_density:
        raise NoDensityError(f"{d.kind} has no density")
    f = d.density(t)
    if f <= 0:
        raise ZeroDensityError(f"density vanishes at t={t}")
    return t - d.tail(t) / f


def _effective_upper(d: Dist1D) -> float:
    if math.isfinite(d.upper):
        return d.upper
    hi = max(1.0, d.lower)
    while d.tail(hi) > 1e-14:
        hi *= 2.0
    return hi


def is_weakly_regular(d: Dist1D, grid_n: int = REGULARITY_GRID_N) -> bool:
    """
    Check that the virtual value is nondecreasing on a grid over the support.

    The grid contains grid_n evenly spaced points plus every breakpoint. A
    support that is not an interval (density vanishing strictly inside the
    hull of the positive-density points) is reported as not regular.
    """
    if not d.has_density:
        raise NoDensityError(f"{d.kind} has no density")
    lo, hi = d.lower, _effective_upper(d)
    grid = np.union1d(np.linspace(lo, hi, grid_n), [p for p in d.breakpoints() if lo <= p <= hi])
    grid = grid[grid < hi]
    f = np.array([d.density(t) for t in grid])
    positive = f > 0
    if not positive.any():
        return False
    first = int(np.argmax(positive))
    last = len(positive) - 1 - int(np.argmax(positive[::-1]))
    if not positive[first:last + 1].all():
        logger.debug("density vanishes inside the support of %r", d)
        return False
    pts = grid[first:last + 1]
    vv = pts - np.array([d.tail(t) for t in pts]) / f[first:last + 1]
    drops = np.diff(vv) < -REGULARITY_TOL
    if drops.any():
        k = int(np.argmax(drops))
        logger.debug("virtual value drops between t=%g and t=%g", pts[k], pts[k + 1])
        return False
    return True


def tau(d: Dist1D, r: float) -> float:
    """The point with H(tau) = r (H is continuous and nondecreasing)."""
    if not (r > 0):
        raise BadParamsError(f"tau needs r > 0, got {r}")
    m = d.mean()
    if m < r:
        raise UnreachableError(f"E[X] = {m:.6g} < r = {r:.6g}")

    def gap(t: float) -> float:
        return d.cumtail(t) - r

    hi = _effective_upper(d)
    while gap(hi) < 0 and not math.isfinite(d.upper):
        hi *= 2.0
    if gap(hi) <= 0:
        return hi
    return float(bisect(gap, 0.0, hi, xtol=TAU_TOL / 10, maxiter=500))


def equal_revenue(r: float, cap: float) -> EqualRevenue:
    return EqualRevenue(r, cap)


def dominating_equal_revenue(d: Dist1D, cap: float | None = None) -> EqualRevenue:
    """ER distribution with the same Myerson revenue; its tail dominates G."""
    r = d.myerson_optimal().revenue
    if cap is None:
        cap = d.upper if math.isfinite(d.upper) and d.upper > r else 2.0 * r
    return EqualRevenue(r, cap)


def truncate(d: Dist1D, M: float) -> Dist1D:
    """X * 1{X <= M}."""
    if not (M > 0):
        raise BadParamsError(f"truncation level must be positive, got {M}")
    if d.upper <= M:
        return d
    if isinstance(d, FiniteAtoms):
        return FiniteAtoms(np.where(d.values <= M, d.values, 0.0), d.probs)
    return Truncated(d, M)


def smooth(d: Dist1D, eps: float) -> PiecewiseUniform:
    """Distribution of X + eps*U with U uniform on [0, 1]."""
    if not (eps > 0):
        raise BadParamsError(f"smoothing width must be positive, got {eps}")
    if not isinstance(d, FiniteAtoms):
        raise UnsupportedRepresentationError("smooth() takes FiniteAtoms input")
    edges = np.union1d(d.values, d.values + eps)
    mids = (edges[:-1] + edges[1:]) / 2
    covered = (d.values[None, :] <= mids[:, None]) & (mids[:, None] < d.values[None, :] + eps)
    densities = (covered * d.probs[None, :]).sum(axis=1) / eps
    return PiecewiseUniform(edges, densities)


def discretize(d: Dist1D, n: int) -> FiniteAtoms:
    """
    Equal-width discretization of a capped distribution.

    Each cell [a, b) keeps its mass P[a <= X < b], placed at the exact
    conditional mean E[X | a <= X < b] (computed from G and H). The last cell
    is closed so cap atoms stay inside.

    Args:
        d: Distribution with finite support.
        n: Number of cells.

    Returns:
        FiniteAtoms with at most n atoms.
    """
    if n < 1:
        raise BadParamsError(f"discretize needs n >= 1, got {n}")
    lo, hi = d.lower, d.upper
    if not math.isfinite(hi):
        raise BadParamsError(f"{d.kind}: cap the distribution before discretizing")
    if hi <= lo:
        return FiniteAtoms([lo], [1.0])

    edges = np.linspace(lo, hi, n + 1)
    total_mean = d.mean()
    values, probs = [], []
    for k in range(n):
        a, b = float(edges[k]), float(edges[k + 1])
        last = k == n - 1
        Ga = d.tail(a)
        Gb = 0.0 if last else d.tail(b)
        mass = Ga - Gb
        if mass <= 0:
            continue
        Hb = total_mean if last else d.cumtail(b)
        moment = a * mass + (Hb - d.cumtail(a)) - (0.0 if last else (b - a) * Gb)
        values.append(min(max(moment / mass, a), b))
        probs.append(mass)
    probs = np.array(probs)
    return FiniteAtoms(values, probs / probs.sum())

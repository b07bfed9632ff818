"""Numerical integration.

Adaptive Simpson's rule with mandatory panel boundaries. The integrands in
this package (tails, K functions) jump or kink at distribution breakpoints,
so every breakpoint inside [a, b] starts a new panel and each panel is
evaluated one ulp inside its endpoints (one-sided limits).
"""

import math
from collections.abc import Callable, Iterable

import numpy as np

from revlab.config import QUAD_MAX_DEPTH, QUAD_TOL
from revlab.errors import BadParamsError, NumericalError


def integrate_adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    max_depth: int = QUAD_MAX_DEPTH,
) -> tuple[float, float]:
    """Adaptive Simpson's rule on a single smooth panel.

    Args:
        f: Function to integrate.
        a: Lower bound.
        b: Upper bound.
        tol: Absolute error tolerance.
        max_depth: Maximum recursion depth.

    Returns:
        Tuple of (integral_value, error_estimate).
    """
    if a == b:
        return 0.0, 0.0

    if a > b:
        result, error = integrate_adaptive_simpson(f, b, a, tol, max_depth)
        return -result, error

    # Tolerances below this cannot be met in double precision.
    floor = 1e-15 * max(1.0, b - a)

    def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
        return h / 3.0 * (fa + 4.0 * fm + fb)

    def _adaptive(a, b, fa, fm, fb, s_whole, depth, tol):
        m = (a + b) / 2.0
        h = (b - a) / 2.0
        lm = (a + m) / 2.0
        rm = (m + b) / 2.0
        flm = f(lm)
        frm = f(rm)

        s_left = _simpson(fa, flm, fm, h / 2.0)
        s_right = _simpson(fm, frm, fb, h / 2.0)
        s_combined = s_left + s_right

        error_estimate = (s_combined - s_whole) / 15.0

        if depth >= max_depth or abs(error_estimate) <= max(tol, floor):
            # Richardson extrapolation
            return s_combined + error_estimate, abs(error_estimate)

        left_result, left_error = _adaptive(a, m, fa, flm, fm, s_left, depth + 1, tol / 2.0)
        right_result, right_error = _adaptive(m, b, fm, frm, fb, s_right, depth + 1, tol / 2.0)
        return left_result + right_result, left_error + right_error

    fa = f(float(np.nextafter(a, b)))
    fb = f(float(np.nextafter(b, a)))
    m = (a + b) / 2.0
    fm = f(m)
    s_whole = _simpson(fa, fm, fb, (b - a) / 2.0)
    return _adaptive(a, b, fa, fm, fb, s_whole, 0, tol)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    breakpoints: Iterable[float] = (),
    tol: float = QUAD_TOL,
) -> float:
    """Integrate f over [a, b], splitting at every breakpoint strictly inside.

    The tolerance is shared among panels in proportion to their width.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise BadParamsError("integration bounds must be finite")
    if b <= a:
        return 0.0 if b == a else -integrate(f, b, a, breakpoints, tol)

    edges = sorted({a, b, *(float(p) for p in breakpoints if a < p < b)})
    total = 0.0
    width = b - a
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = integrate_adaptive_simpson(f, lo, hi, tol * (hi - lo) / width)
        total += value
    if not math.isfinite(total):
        raise NumericalError(f"integral over [{a}, {b}] is not finite")
    return total

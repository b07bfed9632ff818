"""
Structured-text input formats (JSON).

Distribution spec:
    {"kind": "uniform", "low": 0, "high": 1}
    {"kind": "atoms", "values": [...], "probs": [...]}
    {"kind": "piecewise", "breakpoints": [...], "densities": [...]}
    {"kind": "exponential", "rate": 1, "cap": 20}          (cap optional)
    {"kind": "equal_revenue", "r": 1, "cap": 10}
    {"kind": "truncated", "base": {...}, "M": 5}

Instance (a finite joint), either explicit or as a product:
    {"points": [[x1, x2], ...], "probs": [...]}
    {"good1": <dist>, "good2": <dist>, "grid": 12}

Pair: {"good1": <dist>, "good2": <dist>}
Menu: {"entries": [[q1, q2, s], ...]}
Measure (any dimension): {"points": [[...], ...], "probs": [...]}
Scan family: {"n_values": 2, "values": [...], "prob_denominator": 4, "iid": true}

Every parser raises SpecParseError (exit code 2) on malformed input;
validation errors from the constructors keep their own class.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from revlab.bounds import GoodPair
from revlab.config import DEFAULT_GRID
from revlab.continuity import DiscreteMeasureKD
from revlab.distributions import (
    Dist1D,
    EqualRevenue,
    Exponential,
    FiniteAtoms,
    PiecewiseUniform,
    Truncated,
    Uniform,
    discretize,
)
from revlab.errors import RevLabError, SpecParseError
from revlab.mechanisms import MenuMechanism
from revlab.optrev import FiniteJoint, ScanFamily


def load_json(path: Path | str) -> dict:
    """Read a JSON object from disk."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise SpecParseError(f"{path}: file not found") from e
    except json.JSONDecodeError as e:
        raise SpecParseError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from e
    if not isinstance(data, dict):
        raise SpecParseError(f"{path}: expected a JSON object at the top level")
    return data


def _parsing(what: str):
    """Decorator turning KeyError / TypeError / ValueError into SpecParseError."""

    def wrap(fn):
        def inner(data, *args, **kwargs):
            try:
                return fn(data, *args, **kwargs)
            except RevLabError:
                raise
            except KeyError as e:
                raise SpecParseError(f"{what}: missing field {e.args[0]!r}") from e
            except (TypeError, ValueError) as e:
                raise SpecParseError(f"{what}: {e}") from e

        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner

    return wrap


# =============================================================================
# Distributions
# =============================================================================

@_parsing("distribution")
def dist_from_dict(data: dict) -> Dist1D:
    kind = data["kind"]
    if kind == "uniform":
        return Uniform(float(data["low"]), float(data["high"]))
    if kind == "atoms":
        return FiniteAtoms(data["values"], data["probs"])
    if kind == "piecewise":
        return PiecewiseUniform(data["breakpoints"], data["densities"])
    if kind == "exponential":
        cap = data.get("cap")
        return Exponential(float(data["rate"]), None if cap is None else float(cap))
    if kind == "equal_revenue":
        return EqualRevenue(float(data["r"]), float(data["cap"]))
    if kind == "truncated":
        return Truncated(dist_from_dict(data["base"]), float(data["M"]))
    raise SpecParseError(f"unknown distribution kind {kind!r}")


def dist_to_dict(d: Dist1D) -> dict:
    return d.to_dict()


def apply_cap(d: Dist1D, cap: float | None) -> Dist1D:
    """Cap an uncapped exponential (the only family with unbounded support)."""
    if cap is None or math.isfinite(d.upper):
        return d
    if isinstance(d, Exponential):
        return Exponential(d.rate, cap)
    return Truncated(d, cap)


# =============================================================================
# Instances, pairs, menus, measures
# =============================================================================

@_parsing("instance")
def instance_from_dict(data: dict, grid: int | None = None, cap: float | None = None) -> FiniteJoint:
    """Explicit points or a product of two (discretized) marginals."""
    if "points" in data:
        return FiniteJoint.from_points(data["points"], data["probs"])
    n = int(grid or data.get("grid", DEFAULT_GRID))
    marginals = []
    for key in ("good1", "good2"):
        d = apply_cap(dist_from_dict(data[key]), cap)
        marginals.append(d if isinstance(d, FiniteAtoms) else discretize(d, n))
    return FiniteJoint.product(*marginals)


def instance_to_dict(j: FiniteJoint) -> dict:
    return {"points": j.points.tolist(), "probs": j.probs.tolist()}


@_parsing("pair")
def pair_from_dict(data: dict, cap: float | None = None) -> GoodPair:
    d1 = apply_cap(dist_from_dict(data["good1"]), cap)
    d2 = apply_cap(dist_from_dict(data["good2"]), cap)
    return GoodPair.from_dists(d1, d2)


def pair_to_dict(pair: GoodPair) -> dict:
    return {"good1": pair.d1.to_dict(), "good2": pair.d2.to_dict()}


@_parsing("menu")
def menu_from_dict(data: dict) -> MenuMechanism:
    return MenuMechanism(data["entries"])


def menu_to_dict(m: MenuMechanism) -> dict:
    return {"entries": m.entries.tolist()}


@_parsing("measure")
def measure_from_dict(data: dict) -> DiscreteMeasureKD:
    return DiscreteMeasureKD(data["points"], data["probs"])


@_parsing("scan family")
def family_from_dict(data: dict) -> ScanFamily:
    return ScanFamily(
        n_values=int(data.get("n_values", 2)),
        values=tuple(float(v) for v in data.get("values", (1, 2, 3, 4))),
        prob_denominator=int(data.get("prob_denominator", 4)),
        iid=bool(data.get("iid", True)),
    )


def family_to_dict(f: ScanFamily) -> dict:
    return {
        "n_values": f.n_values,
        "values": list(f.values),
        "prob_denominator": f.prob_denominator,
        "iid": f.iid,
    }

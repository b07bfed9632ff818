"""
Two-good revenue lab - command-line entry point.

Commands:
    price     Myerson price and revenue of a one-good distribution
    ratio     SRev / Rev (and MonRev) of a finite instance against the guarantee
    bounds    Bound certificates and K / L / phi traces for a density pair
    scan      Search a lattice family for the worst SRev / Rev
    prohorov  Prohorov distance between two finite measures
    verify    Run the acceptance suites

Usage:
    revlab price fixtures/uniform.json
    revlab ratio fixtures/iid_two_point.json --out results --menu-out results/menu.json
    revlab ratio fixtures/iid_two_point.json --menu results/menu.json
    python -m revlab.main verify --seed 0

Exit codes: 0 ok, 1 guarantee violation or failed suite, 2 input error,
3 solver error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from revlab.bounds import certificates, k_fun, l_fun, sup_i
from revlab.config import (
    DEFAULT_BUDGET,
    DEFAULT_GRID,
    DEFAULT_SEED,
    LOG_LEVEL,
    LP_BACKEND,
    OUTPUT_FOLDER,
    SUP_GRID_N,
)
from revlab.continuity import prohorov
from revlab.distributions import is_weakly_regular
from revlab.errors import BadParamsError, NumericalError, RevLabError
from revlab.mechanisms import MenuMechanism, assignment_from_menu, revenue, verify_ic_ir_npt
from revlab.optrev import FiniteJoint, ScanFamily, ratio_report, scan_worst_ratio
from revlab.reports import export_to_excel, write_csv, write_json
from revlab.spec_io import (
    apply_cap,
    dist_from_dict,
    family_from_dict,
    family_to_dict,
    instance_from_dict,
    load_json,
    measure_from_dict,
    menu_from_dict,
    menu_to_dict,
    pair_from_dict,
    pair_to_dict,
)
from revlab.suites import run_suites

logger = logging.getLogger(__name__)

VIOLATION_EXIT = 1


# =============================================================================
# Run configuration
# =============================================================================

@dataclass
class RunConfig:
    command: str
    inputs: list[Path] = field(default_factory=list)
    seed: int = DEFAULT_SEED
    grid: int | None = None
    tol: float = 1e-6
    out: Path = OUTPUT_FOLDER
    lambda1: float = 1.0
    lambda2: float = 1.0
    cap: float | None = None
    budget: int = DEFAULT_BUDGET
    regular: bool = False
    backend: str = LP_BACKEND
    excel: bool = False
    menu: Path | None = None
    menu_out: Path | None = None
    suites: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (self.tol > 0):
            raise BadParamsError("--tol must be positive")
        if self.grid is not None and self.grid < 1:
            raise BadParamsError("--grid must be at least 1")
        if self.budget < 0:
            raise BadParamsError("--budget must be nonnegative")
        if self.cap is not None and not (self.cap > 0):
            raise BadParamsError("--cap must be positive")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> RunConfig:
        return cls(
            command=ns.command,
            inputs=[Path(p) for p in getattr(ns, "inputs", []) or []],
            seed=ns.seed,
            grid=ns.grid,
            tol=ns.tol,
            out=Path(ns.out),
            lambda1=ns.lambda1,
            lambda2=ns.lambda2,
            cap=ns.cap,
            budget=ns.budget,
            regular=ns.regular,
            backend=ns.backend,
            excel=ns.excel,
            menu=Path(ns.menu) if ns.menu else None,
            menu_out=Path(ns.menu_out) if ns.menu_out else None,
            suites=getattr(ns, "suite", None) or [],
        )


def banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70)


# =============================================================================
# Commands
# =============================================================================

def cmd_price(cfg: RunConfig) -> int:
    banner("MYERSON PRICE")
    spec = load_json(cfg.inputs[0])
    d = apply_cap(dist_from_dict(spec), cfg.cap)
    sol = d.myerson_optimal()
    print(f"  Distribution: {d!r}")
    print(f"  Price:   {sol.price:.10g}")
    print(f"  Revenue: {sol.revenue:.10g}")
    write_json({"command": "price", "input": d.to_dict(),
                "price": sol.price, "revenue": sol.revenue}, cfg.out / "price.json")
    if cfg.menu_out:
        # posted price on the first good
        write_json(menu_to_dict(MenuMechanism([[1.0, 0.0, sol.price]])), cfg.menu_out)
    return 0


def check_menu(cfg: RunConfig, j: FiniteJoint, rev: float) -> dict:
    """IC / IR / NPT of a menu file on the instance's support, plus its revenue."""
    menu = menu_from_dict(load_json(cfg.menu))
    report = verify_ic_ir_npt(assignment_from_menu(menu, j.points), tol=cfg.tol)
    earned = revenue(menu, j)
    print(f"  Menu ({len(menu)} options): revenue {earned:.10g}, "
          f"{'ok' if report.ok else f'{report.kind} violation {report.worst_violation:.3e}'}")
    return {
        "entries": menu.entries.tolist(),
        "ok": report.ok,
        "worst_violation": report.worst_violation,
        "kind": report.kind,
        "witness": list(report.witness) if report.witness else None,
        "revenue": earned,
        "share_of_rev": earned / rev if rev > 0 else None,
    }


def cmd_ratio(cfg: RunConfig) -> int:
    banner("SREV / REV")
    spec = load_json(cfg.inputs[0])
    j = instance_from_dict(spec, grid=cfg.grid, cap=cfg.cap)
    print(f"\n[Step 1] Instance: {len(j)} support points, independent={j.independent}")

    print("[Step 2] Solving the revenue LPs...")
    report = ratio_report(j, regular=cfg.regular, backend=cfg.backend)
    solution = report.solution
    print(f"  SRev:   {report.srev:.10g}")
    print(f"  Rev:    {report.rev:.10g}")
    if report.monrev is not None:
        print(f"  MonRev: {report.monrev:.10g}")
    print(f"  Ratio:  {report.ratio:.6f}")
    if report.guarantee is not None:
        print(f"  Guarantee {report.guarantee:.6f}, slack {report.slack:+.6f}")

    menu_check = check_menu(cfg, j, report.rev) if cfg.menu else None

    table = solution.table()
    payload = {"command": "ratio", "report": report.to_dict(),
               "rounds": solution.rounds, "ic_rows": solution.n_rows}
    if menu_check is not None:
        payload["menu"] = menu_check
    write_json(payload, cfg.out / "ratio.json")
    write_csv(table, cfg.out / "ratio_solution.csv")
    if cfg.excel:
        export_to_excel({"solution": table}, cfg.out / "ratio_solution.xlsx")
    if cfg.menu_out:
        write_json(menu_to_dict(solution.to_menu()), cfg.menu_out)

    if report.slack is not None and report.slack < -cfg.tol:
        print(f"\nGuarantee violated by {-report.slack:.3e}")
        return VIOLATION_EXIT
    if menu_check is not None and not menu_check["ok"]:
        print("\nMenu fails the IC / IR / NPT check")
        return VIOLATION_EXIT
    return 0


def cmd_bounds(cfg: RunConfig) -> int:
    banner("BOUND CERTIFICATES")
    spec = load_json(cfg.inputs[0])
    pair = pair_from_dict(spec, cap=cfg.cap)
    grid_n = cfg.grid or SUP_GRID_N
    print(f"  r1 = {pair.r1:.10g}, r2 = {pair.r2:.10g}, cap = {pair.cap:g}")

    regular = cfg.regular
    if regular and not (is_weakly_regular(pair.d1) and is_weakly_regular(pair.d2)):
        logger.warning("--regular given but the pair is not regular; regular bound suppressed")
        print("  Warning: pair is not regular, regular bound suppressed")
        regular = False

    certs = certificates(pair, cfg.lambda1, cfg.lambda2, grid_n=grid_n, regular=regular)
    for c in certs:
        print(f"  {c.which:<18} k_term {c.k_term:.8f} <= {c.k_term_bound:.8f}, total {c.total_bound:.8f}")

    sup = sup_i(pair, cfg.lambda1, cfg.lambda2, grid_n)
    t = np.linspace(0.0, pair.cap, 4 * grid_n + 1)
    K1 = np.array([k_fun(pair, 1, v) for v in t])
    K2 = np.array([k_fun(pair, 2, v) for v in t])
    lam1, lam2 = cfg.lambda1, cfg.lambda2
    # step allocations attaining I(a, b, c)
    window = (t >= sup.a) & (t < sup.c)
    upper = t >= sup.c
    phi1 = np.where(upper | (window & (K1 >= K2)), lam1, 0.0)
    phi2 = np.where(upper | (window & (K2 > K1)), lam1, 0.0) + np.where(t >= sup.b, lam2 - lam1, 0.0)
    trace = pd.DataFrame({
        "t": t,
        "K1": K1,
        "K2": K2,
        "L1": [l_fun(pair, 1, v) for v in t],
        "L2": [l_fun(pair, 2, v) for v in t],
        "phi1": phi1,
        "phi2": phi2,
    })
    write_json({
        "command": "bounds",
        "pair": pair_to_dict(pair),
        "r1": pair.r1, "r2": pair.r2,
        "sup": {"value": sup.value, "a": sup.a, "b": sup.b, "c": sup.c},
        "certificates": [c.to_dict() for c in certs],
    }, cfg.out / "bounds.json")
    write_csv(trace, cfg.out / "bounds_trace.csv")
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    banner("WORST-RATIO SCAN")
    family = family_from_dict(load_json(cfg.inputs[0])) if cfg.inputs else ScanFamily()
    result = scan_worst_ratio(family, cfg.budget, seed=cfg.seed, backend=cfg.backend)
    print(f"  Evaluated {result.evaluated} instances (budget {cfg.budget}, seed {cfg.seed})")
    if result.best_ratio is not None:
        print(f"  Worst SRev/Rev: {result.best_ratio:.6f}")
    write_json({"command": "scan", "family": family_to_dict(family), "seed": cfg.seed,
                "budget": cfg.budget, "evaluated": result.evaluated,
                "best_ratio": result.best_ratio, "best_instance": result.best_instance},
               cfg.out / "scan.json")
    write_csv(result.trace, cfg.out / "scan_trace.csv")
    if cfg.excel:
        export_to_excel({"trace": result.trace}, cfg.out / "scan_trace.xlsx")
    return 0


def cmd_prohorov(cfg: RunConfig) -> int:
    banner("PROHOROV DISTANCE")
    if len(cfg.inputs) != 2:
        raise BadParamsError("prohorov needs exactly two measure files")
    mu, nu = (measure_from_dict(load_json(p)) for p in cfg.inputs)
    result = prohorov(mu, nu)
    print(f"  Distance: {result.distance:.8f}")
    write_json({"command": "prohorov", **result.to_dict()}, cfg.out / "prohorov.json")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    banner("ACCEPTANCE SUITES")
    results = run_suites(cfg.suites or None, cfg.seed, cfg.budget)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"  [{status}] {r.name:<18} {r.seconds:7.1f}s")
        for msg in r.failures[:5]:
            print(f"      {msg}")
        if r.error:
            print(f"      {r.error}")
    write_json({"command": "verify", "seed": cfg.seed, "budget": cfg.budget,
                "suites": [r.to_dict() for r in results]}, cfg.out / "verify.json")
    failed = [r.name for r in results if not r.passed]
    banner("VERIFY COMPLETE" if not failed else f"VERIFY FAILED: {', '.join(failed)}")
    return VIOLATION_EXIT if failed else 0


COMMANDS = {
    "price": cmd_price,
    "ratio": cmd_ratio,
    "bounds": cmd_bounds,
    "scan": cmd_scan,
    "prohorov": cmd_prohorov,
    "verify": cmd_verify,
}


# =============================================================================
# Argument parsing
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--grid", type=int, default=None,
                        help=f"discretization cells / search grid (default {DEFAULT_GRID} / {SUP_GRID_N})")
    common.add_argument("--tol", type=float, default=1e-6, help="guarantee-violation tolerance")
    common.add_argument("--out", default=str(OUTPUT_FOLDER))
    common.add_argument("--lambda1", type=float, default=1.0)
    common.add_argument("--lambda2", type=float, default=1.0)
    common.add_argument("--cap", type=float, default=None, help="cap for unbounded distributions")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--regular", action="store_true")
    common.add_argument("--backend", choices=("simplex", "highs"), default=LP_BACKEND)
    common.add_argument("--excel", action="store_true", help="also write .xlsx tables")
    common.add_argument("--menu", default=None, help="menu file to check against the instance")
    common.add_argument("--menu-out", default=None, help="write the optimal menu to this file")

    parser = argparse.ArgumentParser(prog="revlab", description="Two-good revenue lab")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, nargs in (("price", 1), ("ratio", 1), ("bounds", 1), ("prohorov", 2)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("inputs", nargs=nargs)
    p = sub.add_parser("scan", parents=[common])
    p.add_argument("inputs", nargs="?", default=None, help="optional scan family file")
    p = sub.add_parser("verify", parents=[common])
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if isinstance(getattr(ns, "inputs", None), str):
        ns.inputs = [ns.inputs]
    logging.basicConfig(level=LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = RunConfig.from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except RevLabError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
        logger.debug("numerical failure", exc_info=True)
        err = NumericalError(f"{type(e).__name__}: {e}")
        print(f"Error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())

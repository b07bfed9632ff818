"""
Dense simplex core for   maximize c.v  s.t.  A v <= h,  v >= 0.

The tableau is kept in dictionary form: x_B = rhs - D x_N, objective
z = z0 + d . x_N. The origin is feasible for the first block of rows the
package builds (h >= 0), so the slack basis starts the primal phase
directly. Rows can be appended after a solve (row generation); the dual
simplex then restores feasibility from the previous optimum.

The original rows are kept alongside the dictionary. Every solve, and every
LP_REFACTOR_EVERY pivots, the dictionary is rebuilt from them and the
current basis, so rounding does not build up across rounds. Both ratio
tests use Harris' two-pass rule; both pricing rules switch to Bland's
smallest-index rule after a run of degenerate pivots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from revlab.config import (
    LP_BLAND_AFTER,
    LP_FEAS_TOL,
    LP_MAX_ITER,
    LP_OPT_TOL,
    LP_PIVOT_TOL,
    LP_REFACTOR_EVERY,
    LP_RESIDUAL_TOL,
    LP_SETTLE_ROUNDS,
)
from revlab.errors import DegenerateError, InfeasibleError, IterationLimitError

logger = logging.getLogger(__name__)


@dataclass
class LPResult:
    value: float
    x: np.ndarray
    iterations: int


class SimplexTableau:
    """
    Incremental LP in dictionary form.

    Variables 0..n-1 are structural, n+i is the slack of row i (rows keep
    the order they were added in, minus any dropped with drop_rows).
    """

    def __init__(
        self,
        c: np.ndarray,
        *,
        feas_tol: float = LP_FEAS_TOL,
        opt_tol: float = LP_OPT_TOL,
        max_iter: int = LP_MAX_ITER,
        refactor_every: int = LP_REFACTOR_EVERY,
    ) -> None:
        self.c = np.asarray(c, dtype=float).copy()
        self.n = len(self.c)
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.max_iter = max_iter
        self.refactor_every = refactor_every

        self.A = np.zeros((0, self.n))
        self.h = np.zeros(0)

        self.D = np.zeros((0, self.n))
        self.rhs = np.zeros(0)
        self.d = self.c.copy()
        self.z0 = 0.0
        self.basic = np.zeros(0, dtype=np.int64)
        self.nonbasic = np.arange(self.n, dtype=np.int64)
        self.iterations = 0
        self._since_refactor = 0

    @property
    def n_rows(self) -> int:
        return len(self.h)

    # -------------------------------------------------------------------------
    # Rows
    # -------------------------------------------------------------------------

    def add_rows(self, A: np.ndarray, h: np.ndarray) -> None:
        """Append rows A v <= h; their slacks enter the basis."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        h = np.asarray(h, dtype=float).ravel()
        if A.shape[1] != self.n or A.shape[0] != h.size:
            raise ValueError("row block has the wrong shape")
        if A.shape[0] == 0:
            return

        first_slack = self.n + self.n_rows
        self.A = np.vstack([self.A, A])
        self.h = np.concatenate([self.h, h])
        self.basic = np.concatenate([self.basic, np.arange(first_slack, first_slack + len(h))])
        self.refactor()

    def drop_rows(self, rows: np.ndarray, min_slack: float = 0.0) -> np.ndarray:
        """
        Remove rows whose slack is basic and larger than min_slack.

        The current basis stays optimal for what is left. Returns the indices
        (before removal) of the rows actually dropped.
        """
        m, n = self.n_rows, self.n
        candidate = np.zeros(m, dtype=bool)
        candidate[np.asarray(rows, dtype=np.int64)] = True

        slack_pos = np.flatnonzero(self.basic >= n)
        slack_row = self.basic[slack_pos] - n
        loose = candidate[slack_row] & (self.rhs[slack_pos] > min_slack)
        drop = np.zeros(m, dtype=bool)
        drop[slack_row[loose]] = True
        if not drop.any():
            return np.zeros(0, dtype=np.int64)

        keep_pos = np.ones(len(self.basic), dtype=bool)
        keep_pos[slack_pos[loose]] = False
        new_index = np.cumsum(~drop) - 1

        self.D = self.D[keep_pos]
        self.rhs = self.rhs[keep_pos]
        self.basic = self.basic[keep_pos]
        for arr in (self.basic, self.nonbasic):
            is_slack = arr >= n
            arr[is_slack] = n + new_index[arr[is_slack] - n]
        self.A = self.A[~drop]
        self.h = self.h[~drop]
        return np.flatnonzero(drop)

    def refactor(self) -> None:
        """Rebuild D, rhs, d and z0 from the original rows and the current basis."""
        m, n = self.n_rows, self.n
        nb = self.nonbasic
        nb_struct = nb < n

        # columns of [A | I] for the nonbasic variables
        NC = np.zeros((m, n))
        NC[:, nb_struct] = self.A[:, nb[nb_struct]]
        slack_cols = np.flatnonzero(~nb_struct)
        NC[nb[slack_cols] - n, slack_cols] = 1.0

        pos_struct = np.flatnonzero(self.basic < n)
        pos_slack = np.flatnonzero(self.basic >= n)
        S = self.basic[pos_struct]
        T = nb[slack_cols] - n          # tight rows
        if len(S) != len(T):
            raise DegenerateError("basis lost its shape")

        if len(S):
            M = self.A[np.ix_(T, S)]
            try:
                sol = np.linalg.solve(M, np.column_stack([self.h[T], NC[T]]))
            except np.linalg.LinAlgError as e:
                raise DegenerateError("basis matrix is singular") from e
            rhs_S, D_S = sol[:, 0], sol[:, 1:]
        else:
            rhs_S, D_S = np.zeros(0), np.zeros((0, n))

        R = self.basic[pos_slack] - n
        A_RS = self.A[np.ix_(R, S)]
        D = np.empty((m, n))
        rhs = np.empty(m)
        D[pos_struct], rhs[pos_struct] = D_S, rhs_S
        D[pos_slack] = NC[R] - A_RS @ D_S
        rhs[pos_slack] = self.h[R] - A_RS @ rhs_S

        c_N = np.zeros(n)
        c_N[nb_struct] = self.c[nb[nb_struct]]
        c_S = self.c[S]
        self.D, self.rhs = D, rhs
        self.z0 = float(c_S @ rhs_S)
        self.d = c_N - c_S @ D_S
        self._since_refactor = 0

    # -------------------------------------------------------------------------
    # Pivoting
    # -------------------------------------------------------------------------

    def _pivot(self, r: int, e: int) -> None:
        piv = self.D[r, e]
        if abs(piv) < LP_PIVOT_TOL:
            raise DegenerateError(f"pivot element {piv:.3e} too small")
        col = self.D[:, e].copy()
        row = self.D[r] / piv
        row[e] = 1.0 / piv
        rhs_r = self.rhs[r] / piv

        touched = np.flatnonzero(col)
        self.D[touched] -= np.outer(col[touched], row)
        self.rhs[touched] -= col[touched] * rhs_r
        self.D[:, e] = -col / piv
        self.D[r] = row
        self.rhs[r] = rhs_r

        de = self.d[e]
        self.z0 += de * rhs_r
        self.d -= de * row
        self.d[e] = -de / piv

        self.basic[r], self.nonbasic[e] = self.nonbasic[e], self.basic[r]
        self.iterations += 1
        self._since_refactor += 1
        if self.iterations > self.max_iter:
            raise IterationLimitError(f"simplex exceeded {self.max_iter} pivots")
        if self._since_refactor >= self.refactor_every:
            self.refactor()

    def _primal(self) -> None:
        degenerate_run = 0
        while True:
            candidates = np.flatnonzero(self.d > self.opt_tol)
            if candidates.size == 0:
                return
            bland = degenerate_run >= LP_BLAND_AFTER
            if bland:
                e = int(candidates[np.argmin(self.nonbasic[candidates])])
            else:
                e = int(candidates[np.argmax(self.d[candidates])])

            col = self.D[:, e]
            rows = np.flatnonzero(col > LP_PIVOT_TOL)
            if rows.size == 0:
                if self._since_refactor:
                    self.refactor()
                    continue
                raise DegenerateError("objective is unbounded; lost precision or malformed rows")
            room = np.maximum(self.rhs[rows], 0.0)
            ratios = room / col[rows]
            if bland:
                ties = rows[ratios <= ratios.min() + self.feas_tol]
                r = int(ties[np.argmin(self.basic[ties])])
            else:
                bound = ((room + self.feas_tol) / col[rows]).min()
                eligible = rows[ratios <= bound]
                r = int(eligible[np.argmax(col[eligible])])
            step = max(self.rhs[r], 0.0) / col[r]

            degenerate_run = degenerate_run + 1 if step <= self.feas_tol else 0
            self._pivot(r, e)

    def _dual(self) -> None:
        degenerate_run = 0
        while True:
            negative = np.flatnonzero(self.rhs < -self.feas_tol)
            if negative.size == 0:
                return
            bland = degenerate_run >= LP_BLAND_AFTER
            if bland:
                r = int(negative[np.argmin(self.basic[negative])])
            else:
                r = int(negative[np.argmin(self.rhs[negative])])

            row = self.D[r]
            cols = np.flatnonzero(row < -LP_PIVOT_TOL)
            if cols.size == 0:
                if self._since_refactor:
                    self.refactor()
                    continue
                raise InfeasibleError("added rows make the problem infeasible")
            cost = np.minimum(self.d[cols], 0.0)
            ratios = cost / row[cols]
            if bland:
                ties = cols[ratios <= ratios.min() + self.opt_tol]
                e = int(ties[np.argmin(self.nonbasic[ties])])
            else:
                bound = ((cost - self.opt_tol) / row[cols]).min()
                eligible = cols[ratios <= bound]
                e = int(eligible[np.argmin(row[eligible])])
            step = min(self.d[e], 0.0) / row[e]

            degenerate_run = degenerate_run + 1 if step <= self.opt_tol else 0
            self._pivot(r, e)

    def _settled(self) -> bool:
        primal_ok = self.n_rows == 0 or self.rhs.min() >= -self.feas_tol
        return primal_ok and self.d.max(initial=-np.inf) <= self.opt_tol

    def solve(self) -> LPResult:
        start = self.iterations
        self.refactor()
        for _ in range(LP_SETTLE_ROUNDS):
            if self.n_rows and self.rhs.min() < -self.feas_tol:
                self._dual()
            self._primal()
            self.refactor()
            if self._settled():
                break
        else:
            raise DegenerateError("simplex did not settle on a feasible optimum")
        x = self.solution()
        logger.debug("simplex: %d rows, %d pivots this solve", self.n_rows, self.iterations - start)
        return LPResult(value=float(self.c @ x), x=x, iterations=self.iterations)

    def solution(self) -> np.ndarray:
        """Structural part of the basic solution, checked against the original rows."""
        x = np.zeros(self.n)
        structural = self.basic < self.n
        x[self.basic[structural]] = self.rhs[structural]
        scale = 1.0 + (float(np.abs(self.h).max()) if self.n_rows else 0.0)
        residual = max((self.A @ x - self.h).max(initial=0.0), (-x).max(initial=0.0))
        if residual > LP_RESIDUAL_TOL * scale:
            raise DegenerateError(f"basic solution violates its rows by {residual:.3e}")
        return np.maximum(x, 0.0)


def solve_highs(c: np.ndarray, A: np.ndarray, h: np.ndarray) -> LPResult:
    """Solve the same LP with scipy's HiGHS (oracle / large-instance backend)."""
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    res = linprog(-np.asarray(c, dtype=float), A_ub=csr_matrix(A), b_ub=h,
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": LP_FEAS_TOL,
                           "dual_feasibility_tolerance": LP_OPT_TOL})
    if res.status == 1:
        raise IterationLimitError(res.message)
    if res.status == 2:
        raise InfeasibleError(f"HiGHS: {res.message}")
    if res.status != 0:
        raise DegenerateError(f"HiGHS failed: {res.message}")
    return LPResult(value=float(-res.fun), x=np.asarray(res.x), iterations=int(res.nit))

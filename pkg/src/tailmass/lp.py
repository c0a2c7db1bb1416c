"""Dense linear programming by revised simplex.

Minimizes c @ x subject to row constraints (<= or ==) and variable bounds.
Two-phase revised simplex with an explicit basis inverse, Dantzig pricing,
and Bland's rule engaged as an anti-cycling safeguard once pivots stall.

The mixture-fitting programs in this package are tall (thousands of envelope
rows, a couple hundred mixture weights), which is the worst case for a primal
simplex whose basis is row-sized.  `solve` therefore transposes such problems
and runs the simplex on the dual, whose basis is column-sized, and reads the
primal vertex off the dual row multipliers.  The recovered point is verified
against the original program; failure of the check (or a status the dual
cannot disambiguate) falls back to the direct primal solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

LESS_EQUAL = "<="
EQUAL = "=="

_FEAS_TOL = 1e-9
_OPT_TOL = 1e-9
_PHASE1_TOL = 1e-7
_REFRESH_EVERY = 40  # recompute the basis inverse from scratch this often
_STALL_LIMIT = 60     # consecutive degenerate pivots before Bland's rule


@dataclass
class LinearProgram:
    """min objective @ x  s.t.  lhs[i] @ x (<= or ==) rhs[i],  lower <= x <= upper."""

    objective: np.ndarray
    lhs: np.ndarray
    relations: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        self.lhs = np.atleast_2d(np.asarray(self.lhs, dtype=float))
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.relations = tuple(self.relations)
        m, n = self.lhs.shape
        if self.objective.shape != (n,):
            raise ValueError("objective length does not match lhs columns")
        if self.rhs.shape != (m,) or len(self.relations) != m:
            raise ValueError("rhs/relations length does not match lhs rows")
        if any(r not in (LESS_EQUAL, EQUAL) for r in self.relations):
            raise ValueError("relations must be '<=' or '=='")
        self.lower = (
            np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        )
        self.upper = (
            np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound length does not match lhs columns")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")
        for arr in (self.objective, self.lhs, self.rhs):
            if not np.all(np.isfinite(arr)):
                raise ValueError("objective, lhs and rhs must be finite")

    @property
    def n_rows(self) -> int:
        return self.lhs.shape[0]

    @property
    def n_cols(self) -> int:
        return self.lhs.shape[1]


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    objective_value: float
    iterations: int = 0


def _simplex_core(
    c: np.ndarray, A: np.ndarray, relations: np.ndarray, b: np.ndarray
) -> tuple[str, np.ndarray | None, float, np.ndarray | None, int]:
    """Two-phase revised simplex on min c@x, A x (<=|==) b, x >= 0.

    relations is a boolean array, True where the row is '<='.  Returns
    (status, x, value, row_duals, iterations); row_duals refer to the rows
    as given (scaling and sign flips undone).
    """
    m, n = A.shape
    n_slack = int(relations.sum())
    A_eq = np.zeros((m, n + n_slack))
    A_eq[:, :n] = A
    slack_of_row = np.full(m, -1)
    j = n
    for i in np.flatnonzero(relations):
        A_eq[i, j] = 1.0
        slack_of_row[i] = j
        j += 1
    b_eq = b.astype(float).copy()

    # row scaling for conditioning; duals are unscaled on the way out
    scale = np.abs(A_eq).max(axis=1)
    scale[scale == 0] = 1.0
    A_eq /= scale[:, None]
    b_eq /= scale

    sign = np.ones(m)
    neg = b_eq < 0
    A_eq[neg] *= -1.0
    b_eq[neg] *= -1.0
    sign[neg] = -1.0

    n_tot = n + n_slack
    basis = np.empty(m, dtype=int)
    artificial_rows = []
    for i in range(m):
        sj = slack_of_row[i]
        if sj >= 0 and A_eq[i, sj] > 0:
            basis[i] = sj
        else:
            artificial_rows.append(i)
    n_art = len(artificial_rows)
    if n_art:
        art_block = np.zeros((m, n_art))
        for k, i in enumerate(artificial_rows):
            art_block[i, k] = 1.0
            basis[i] = n_tot + k
        A_eq = np.hstack([A_eq, art_block])

    max_iter = 50 * (m + A_eq.shape[1])
    total_iter = 0

    def run(cost: np.ndarray, basis: np.ndarray, allowed: int) -> tuple[str, np.ndarray, np.ndarray]:
        """Iterate to optimality over columns [0, allowed); returns (status, basis, B_inv)."""
        nonlocal total_iter
        B_inv = np.linalg.inv(A_eq[:, basis])
        xB = B_inv @ b_eq
        stall = 0
        last_val = math.inf
        since_refresh = 0

        def refresh():
            nonlocal B_inv, xB, since_refresh
            B_inv = np.linalg.inv(A_eq[:, basis])
            xB = np.clip(B_inv @ b_eq, 0.0, None)
            since_refresh = 0

        while True:
            if total_iter >= max_iter:
                return ITERATION_LIMIT, basis, B_inv
            y = cost[basis] @ B_inv
            reduced = cost[:allowed] - y @ A_eq[:, :allowed]
            reduced[basis[basis < allowed]] = 0.0
            if stall >= _STALL_LIMIT:
                candidates = np.flatnonzero(reduced < -_OPT_TOL)
                enter = int(candidates[0]) if candidates.size else -1  # Bland
            else:
                enter = int(np.argmin(reduced))
                if reduced[enter] >= -_OPT_TOL:
                    enter = -1
            if enter < 0:
                # only trust optimality verdicts from a fresh inverse
                if since_refresh == 0:
                    return OPTIMAL, basis, B_inv
                refresh()
                continue
            d = B_inv @ A_eq[:, enter]
            pos = d > _FEAS_TOL
            if not pos.any():
                if since_refresh == 0:
                    return UNBOUNDED, basis, B_inv
                refresh()
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(pos, xB / d, np.inf)
            if stall >= _STALL_LIMIT:
                theta = ratios[pos].min()
                tie = np.flatnonzero(pos & (ratios <= theta + 1e-12))
                leave = int(tie[np.argmin(basis[tie])])  # Bland's leaving rule
            else:
                # Harris-style: among rows within the feasibility tolerance of
                # the best ratio, take the largest pivot (keeps bases well
                # conditioned; basic variables dip below 0 by at most the tol)
                theta_max = ((xB[pos] + _FEAS_TOL) / d[pos]).min()
                cands = np.flatnonzero(pos & (ratios <= theta_max))
                leave = int(cands[np.argmax(d[cands])])
            basis[leave] = enter
            # pivot update of the inverse
            piv = d[leave]
            B_inv[leave] /= piv
            others = np.arange(m) != leave
            B_inv[others] -= np.outer(d[others], B_inv[leave])
            xB = B_inv @ b_eq
            np.clip(xB, 0.0, None, out=xB)
            total_iter += 1
            since_refresh += 1
            if since_refresh >= _REFRESH_EVERY:
                refresh()
            val = cost[basis] @ xB
            if val < last_val - 1e-12:
                stall = 0
            else:
                stall += 1
            last_val = val

    if n_art:
        cost1 = np.zeros(A_eq.shape[1])
        cost1[n_tot:] = 1.0
        status, basis, B_inv = run(cost1, basis, A_eq.shape[1])
        if status == ITERATION_LIMIT:
            return ITERATION_LIMIT, None, math.nan, None, total_iter
        xB = np.clip(B_inv @ b_eq, 0.0, None)
        if float(cost1[basis] @ xB) > _PHASE1_TOL:
            return INFEASIBLE, None, math.nan, None, total_iter
        # pivot lingering artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= n_tot:
                row = B_inv[i] @ A_eq[:, :n_tot]
                cands = np.flatnonzero(np.abs(row) > 1e-9)
                if cands.size:
                    basis[i] = int(cands[0])
                    B_inv = np.linalg.inv(A_eq[:, basis])
                # else: redundant row; the artificial stays basic at value 0

    cost2 = np.zeros(A_eq.shape[1])
    cost2[:n] = c
    status, basis, B_inv = run(cost2, basis, n_tot if n_art else A_eq.shape[1])
    if status in (ITERATION_LIMIT,):
        return ITERATION_LIMIT, None, math.nan, None, total_iter
    xB = np.clip(B_inv @ b_eq, 0.0, None)
    if status == UNBOUNDED:
        return UNBOUNDED, None, -math.inf, None, total_iter
    x = np.zeros(A_eq.shape[1])
    x[basis] = xB
    y = cost2[basis] @ B_inv
    duals = y * sign / scale
    return OPTIMAL, x[:n], float(c @ x[:n]), duals, total_iter


def _canonicalize(lp: LinearProgram):
    """Rewrite with x >= 0: shift finite lower bounds, turn finite upper
    bounds into extra rows, split free variables.  Returns the pieces plus a
    function mapping a canonical solution back to original variables."""
    n = lp.n_cols
    shift = np.where(np.isfinite(lp.lower), lp.lower, 0.0)
    const = float(lp.objective @ shift)
    free = ~np.isfinite(lp.lower)

    rows = lp.lhs
    b = lp.rhs - rows @ shift
    rel = np.array([r == LESS_EQUAL for r in lp.relations])
    ub = lp.upper - shift
    bounded = np.flatnonzero(np.isfinite(ub))
    if bounded.size:
        extra = np.zeros((bounded.size, n))
        extra[np.arange(bounded.size), bounded] = 1.0
        rows = np.vstack([rows, extra])
        b = np.concatenate([b, ub[bounded]])
        rel = np.concatenate([rel, np.ones(bounded.size, dtype=bool)])

    if free.any():
        A = np.hstack([rows, -rows[:, free]])
        c = np.concatenate([lp.objective, -lp.objective[free]])
    else:
        A = rows.copy()
        c = lp.objective.copy()

    n_free = int(free.sum())

    def back(xc: np.ndarray) -> np.ndarray:
        x = xc[:n].copy()
        if n_free:
            x[free] -= xc[n : n + n_free]
        return x + shift

    return c, A, rel, b, const, back


def _solve_via_dual(c, A, rel, b):
    """Solve min c@x, A x (<=|==) b, x >= 0 by running simplex on the dual.

    Dual: max b@y, A.T y <= c, y <= 0 on '<=' rows, free on '==' rows.
    Returns (status, x, value, iterations) or None when the dual route
    cannot certify an answer.
    """
    m, n = A.shape
    L = rel
    E = ~rel
    blocks = []
    costs = []
    if L.any():
        blocks.append(-A[L].T)
        costs.append(b[L])
    if E.any():
        blocks.append(A[E].T)
        costs.append(-b[E])
        blocks.append(-A[E].T)
        costs.append(b[E])
    A_dual = np.hstack(blocks)
    c_dual = np.concatenate(costs)
    rel_dual = np.ones(n, dtype=bool)
    try:
        status, _, value, duals, iters = _simplex_core(c_dual, A_dual, rel_dual, c)
    except np.linalg.LinAlgError:
        return None
    if status == UNBOUNDED:
        return INFEASIBLE, None, math.nan, iters
    if status != OPTIMAL or duals is None:
        return None
    x = -duals
    # verify the recovered vertex before trusting it
    if np.any(x < -1e-7):
        return None
    x = np.clip(x, 0.0, None)
    resid = A @ x - b
    ok_rows = np.all(resid[L] <= 1e-6 * max(1.0, np.abs(b).max())) if L.any() else True
    ok_eq = np.all(np.abs(resid[E]) <= 1e-6 * max(1.0, np.abs(b).max())) if E.any() else True
    primal_val = float(c @ x)
    dual_val = -value
    if not (ok_rows and ok_eq and abs(primal_val - dual_val) <= 1e-6 * max(1.0, abs(dual_val))):
        return None
    return OPTIMAL, x, primal_val, iters


def solve(lp: LinearProgram) -> LpSolution:
    """Solve the program; statuses: optimal, infeasible, unbounded, iteration_limit."""
    c, A, rel, b, const, back = _canonicalize(lp)
    m, n = A.shape

    if m > max(2 * n, 64):
        dual_result = _solve_via_dual(c, A, rel, b)
        if dual_result is not None:
            status, x, value, iters = dual_result
            if status == OPTIMAL:
                return LpSolution(OPTIMAL, back(x), value + const, iters)
            return LpSolution(status, None, math.nan, iters)

    try:
        status, x, value, _, iters = _simplex_core(c, A, rel, b)
    except np.linalg.LinAlgError:
        return LpSolution(ITERATION_LIMIT, None, math.nan, 0)
    if status == OPTIMAL:
        return LpSolution(OPTIMAL, back(x), value + const, iters)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, None, -math.inf, iters)
    return LpSolution(status, None, math.nan, iters)

"""Dense simplex solver for small box-plus-halfspace linear programs.

The programs solved here have few variables (a handful up to a few dozen)
and potentially thousands of inequality rows, so the solver runs a revised
simplex on the dual: the dual has one equality row per primal variable and
one nonnegative variable per primal inequality, which keeps every basis a
tiny d-by-d matrix regardless of how many cutting planes have accumulated.

Pivoting uses Dantzig's rule for speed and switches permanently to Bland's
rule after a run of non-improving (degenerate) pivots, so termination is
guaranteed and every solve is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITER_LIMIT = "iter_limit"

# consecutive stalled pivots tolerated before anti-cycling kicks in
_STALL_LIMIT = 60


@dataclass
class LpResult:
    """Outcome of one LP solve.

    ``active_rows`` lists the indices of user inequality rows that sit in
    the optimal dual basis, i.e. the rows binding at the reported vertex.
    """

    status: str
    value: float
    x: np.ndarray | None
    active_rows: np.ndarray
    iterations: int


class SimplexError(RuntimeError):
    """Numerical breakdown inside the simplex (singular basis)."""


def solve_box_lp(c, rows_a, rows_b, lo, hi, max_iters=20000):
    """Maximize ``c @ x`` subject to ``rows_a @ x <= rows_b`` and ``lo <= x <= hi``.

    Args:
        c: objective vector, shape (d,).
        rows_a: inequality normals, shape (m, d); may be empty.
        rows_b: inequality offsets, shape (m,).
        lo, hi: per-coordinate bounds, shape (d,); must be finite with lo < hi.
        max_iters: pivot budget before giving up with ITER_LIMIT.

    Returns:
        LpResult. On INFEASIBLE ``x`` is None; on ITER_LIMIT ``x`` is the
        best primal point recovered so far (its value may overestimate the
        true optimum).
    """
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = c.shape[0]
    rows_a = np.asarray(rows_a, dtype=float).reshape(-1, d)
    rows_b = np.asarray(rows_b, dtype=float).reshape(-1)
    m = rows_a.shape[0]
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
        raise ValueError("box bounds must be finite with lo < hi")

    # Column catalog of the dual: user rows, then x <= hi rows, then -x <= -lo.
    # M is d x n_cols with M[:, j] = j-th inequality normal; dual problem is
    #   min  cost @ y   s.t.  M @ y = c,  y >= 0.
    n_cols = m + 2 * d
    M = np.empty((d, n_cols))
    cost = np.empty(n_cols)
    if m:
        M[:, :m] = rows_a.T
        cost[:m] = rows_b
    M[:, m : m + d] = np.eye(d)
    cost[m : m + d] = hi
    M[:, m + d :] = -np.eye(d)
    cost[m + d :] = -lo

    # Sign-matched bound rows give an immediate dual-feasible basis.
    basis = np.where(c >= 0.0, np.arange(m, m + d), np.arange(m + d, m + 2 * d))

    scale = 1.0 + float(np.abs(cost).max(initial=0.0))
    red_tol = 1e-9 * scale
    piv_tol = 1e-11

    use_bland = False
    stall = 0
    best_obj = np.inf
    lam = None

    for it in range(1, max_iters + 1):
        B = M[:, basis]
        try:
            y_b = np.linalg.solve(B, c)
            lam = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError:
            # basis degenerated numerically; least squares keeps us moving
            y_b = np.linalg.lstsq(B, c, rcond=None)[0]
            lam = np.linalg.lstsq(B.T, cost[basis], rcond=None)[0]
        y_b = np.where(y_b < 0.0, np.maximum(y_b, -1e-9), y_b)

        reduced = cost - M.T @ lam
        reduced[basis] = 0.0
        if use_bland:
            viol = np.flatnonzero(reduced < -red_tol)
            if viol.size == 0:
                return _finish(c, lam, basis, m, it)
            j = int(viol[0])
        else:
            j = int(np.argmin(reduced))
            if reduced[j] >= -red_tol:
                return _finish(c, lam, basis, m, it)

        try:
            w = np.linalg.solve(B, M[:, j])
        except np.linalg.LinAlgError:
            w = np.linalg.lstsq(B, M[:, j], rcond=None)[0]
        pos = w > piv_tol
        if not np.any(pos):
            # dual unbounded along this column: primal infeasible
            return LpResult(INFEASIBLE, np.nan, None, np.empty(0, dtype=int), it)

        ratios = np.where(pos, y_b / np.where(pos, w, 1.0), np.inf)
        theta = ratios.min()
        ties = np.flatnonzero(ratios <= theta + 1e-12)
        # smallest basis-column index among ties (Bland-compatible, deterministic)
        leave = int(ties[np.argmin(basis[ties])])
        basis[leave] = j

        # dual objective before the pivot; no strict decrease means a stalled pivot
        obj = float(lam @ c)
        if obj < best_obj - 1e-12 * (1.0 + abs(best_obj)):
            best_obj = obj
            stall = 0
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                use_bland = True

    x = lam if lam is not None else np.zeros(d)
    value = float(c @ x)
    return LpResult(ITER_LIMIT, value, x, _user_rows(basis, m), max_iters)


def _finish(c, lam, basis, m, iterations):
    value = float(c @ lam)
    return LpResult(OPTIMAL, value, lam.copy(), _user_rows(basis, m), iterations)


def _user_rows(basis, m):
    rows = basis[basis < m]
    return np.sort(rows.astype(int))


def solve_support_lp(objective, cut_normals, cut_offsets, lo, hi, max_iters=20000):
    """Maximize ``objective @ x`` over ``{x : cut @ x >= offset for all cuts} ∩ [lo, hi]``.

    Cuts use the >= convention; they are flipped into <= rows internally.
    """
    cut_normals = np.asarray(cut_normals, dtype=float)
    cut_offsets = np.asarray(cut_offsets, dtype=float)
    if cut_normals.size == 0:
        cut_normals = np.empty((0, len(objective)))
        cut_offsets = np.empty(0)
    return solve_box_lp(objective, -cut_normals, -cut_offsets, lo, hi, max_iters)

"""Dense tableau simplex for standard-form linear programs.

    minimize c @ x  subject to  A @ x = b,  x >= 0

Two phases with one artificial variable per row.  Pricing is Dantzig's rule
with Bland's rule as the anti-cycling fallback on degenerate stretches; every
choice is a fixed function of the tableau, so the pivot sequence and the
returned vertex are deterministic.  Linearly dependent
rows are removed before phase 1, and the tableau is rebuilt from the original
data every few dozen pivots and before optimality is declared, which keeps
round-off from piling up on long degenerate runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import rref

PIVOT_TOL = 1e-10
REFACTOR_EVERY = 50
BLAND_AFTER = 50
HARRIS_TOL = 1e-9


@dataclass
class LPResult:
    x: np.ndarray | None
    fun: float
    status: str  # optimal | infeasible | unbounded | numerical_failure
    iterations: int


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _tableau(A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list):
    """Fresh tableau [B^-1 A | B^-1 b; c - c_B B^-1 A | -c_B B^-1 b], or None if B is singular."""
    B = A[:, basis]
    try:
        body = np.linalg.solve(B, np.column_stack([A, b]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(body)):
        return None
    T = np.empty((A.shape[0] + 1, A.shape[1] + 1))
    T[:-1] = body
    T[:-1, basis] = np.eye(len(basis))
    T[-1, :-1] = c
    T[-1, -1] = 0.0
    T[-1] -= c[basis] @ T[:-1]
    T[-1, basis] = 0.0
    return T


def _pivot_steps(T: np.ndarray, basis: list, tol: float, steps: int, state: dict):
    """At most ``steps`` pivots; returns (status, pivots done).

    Dantzig pricing with a Harris ratio test keeps bases well conditioned.  After ``BLAND_AFTER`` consecutive degenerate pivots the
    rule switches to Bland's (lowest index enters, lowest basic index leaves)
    until the objective strictly improves, which rules out cycling.
    """
    n_cols = T.shape[1] - 1
    for k in range(steps):
        reduced = T[-1, :n_cols]
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return "optimal", k
        bland = state["degenerate"] >= BLAND_AFTER
        c = int(candidates[0]) if bland else int(candidates[np.argmin(reduced[candidates])])
        col = T[:-1, c]
        pos = col > tol * max(1.0, float(np.abs(col).max()))
        if not np.any(pos):
            return "unbounded", k
        rhs = np.maximum(T[:-1, -1], 0.0)
        ratios = np.full(col.shape, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        best = ratios.min()
        if bland:
            ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
            r = int(min(ties, key=lambda i: basis[i]))
        else:
            # Harris: relax bounds by the feasibility tolerance, then take the largest pivot
            relaxed = np.full(col.shape, np.inf)
            relaxed[pos] = (rhs[pos] + HARRIS_TOL) / col[pos]
            eligible = np.flatnonzero(ratios <= relaxed.min())
            r = int(eligible[np.argmax(col[eligible])])
        state["degenerate"] = state["degenerate"] + 1 if ratios[r] <= tol else 0
        _pivot(T, r, c)
        basis[r] = c
    return "running", steps


def _solve(A, b, c, basis, tol, max_iter, it, target=None):
    """Run one phase to completion with periodic refactorization.

    With ``target`` set, stop as soon as the objective is at or below it.
    """
    state = {"degenerate": 0}
    while True:
        T = _tableau(A, b, c, basis)
        if T is None:
            return "numerical_failure", None, it
        if target is not None and -T[-1, -1] <= target:
            return "optimal", T, it
        if it >= max_iter:
            return "numerical_failure", T, it
        status, k = _pivot_steps(T, basis, tol, min(REFACTOR_EVERY, max_iter - it), state)
        it += k
        if status == "unbounded":
            return status, T, it
        if status == "optimal":
            fresh = _tableau(A, b, c, basis)
            if fresh is None:
                return "numerical_failure", None, it
            if not np.any(fresh[-1, :-1] < -tol):
                return "optimal", fresh, it


def independent_rows(A: np.ndarray, tol: float = PIVOT_TOL) -> list[int]:
    """Indices of a maximal linearly independent subset of the rows of A."""
    if A.shape[0] == 0:
        return []
    _, pivots = rref(A.T, tol)
    return sorted(pivots)


def linprog_simplex(c, A_eq, b_eq, tol: float = PIVOT_TOL, max_iter: int | None = None) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float, copy=True)
    b = np.array(b_eq, dtype=float, copy=True)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))

    rows = independent_rows(A, tol)
    dropped = [r for r in range(m) if r not in rows]
    A_full, b_full = A, b
    A, b = A[rows], b[rows]
    m = len(rows)
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificials n..n+m-1 form the starting basis
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    feas_tol = 1e-9 * scale
    status, T, it = _solve(A1, b, c1, basis, tol, max_iter, 0, target=feas_tol)
    if status != "optimal":
        return LPResult(None, np.nan, "numerical_failure", it)
    if -T[-1, -1] > feas_tol:
        return LPResult(None, np.nan, "infeasible", it)
    if dropped:
        x1 = np.zeros(n + m)
        x1[basis] = np.maximum(T[:-1, -1], 0.0)
        if np.abs(A_full[dropped] @ x1[:n] - b_full[dropped]).max() > feas_tol:
            return LPResult(None, np.nan, "infeasible", it)

    # swap zero-level artificials for structural columns (the rows are independent)
    for r in range(m):
        if basis[r] >= n:
            row = np.abs(T[r, :n])
            row[[j for j in basis if j < n]] = 0.0
            j = int(np.argmax(row))
            if row[j] <= tol:
                return LPResult(None, np.nan, "numerical_failure", it)
            _pivot(T, r, j)
            basis[r] = j

    status, T, it = _solve(A, b, c, basis, tol, max_iter, it)
    if status != "optimal":
        return LPResult(None, np.nan, status, it)
    x = np.zeros(n)
    x[basis] = np.maximum(T[:-1, -1], 0.0)
    return LPResult(x, float(c @ x), "optimal", it)

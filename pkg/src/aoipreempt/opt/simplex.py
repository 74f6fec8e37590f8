"""Dense two-phase tableau simplex for small bounded LPs.

Solves ``min c x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``lo <= x <= hi`` with every ``lo`` finite.  Bland's rule is used for both
the entering and leaving variable, which rules out cycling; the problems
solved here have a few dozen rows at most.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = "optimal", "infeasible", "unbounded", "iteration_limit"


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    fun: float
    iterations: int

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T, row, col):
    T[row] /= T[row, col]
    piv = T[row]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, piv)


def _iterate(T, basis, n_cols, max_iter, tol):
    """Run simplex pivots on tableau ``T`` (objective in the last row) until optimal."""
    m = T.shape[0] - 1
    it = 0
    while it < max_iter:
        cost = T[-1, :n_cols]
        entering = np.flatnonzero(cost < -tol)
        if entering.size == 0:
            return OPTIMAL, it
        col = entering[0]
        colv = T[:m, col]
        pos = colv > tol
        if not pos.any():
            return UNBOUNDED, it
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        row = min(ties, key=lambda r: basis[r])
        _pivot(T, row, col)
        basis[row] = col
        it += 1
    return ITERATION_LIMIT, it


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None, max_iter=10_000, tol=1e-10):
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    if bounds is None:
        lo, hi = np.zeros(n), np.full(n, np.inf)
    else:
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
    if not np.all(np.isfinite(lo)):
        raise ValueError("every variable needs a finite lower bound")
    if np.any(hi < lo):
        return LpResult(INFEASIBLE, None, np.inf, 0)

    # shift to y = x - lo >= 0 and turn finite upper bounds into rows
    fin = np.flatnonzero(np.isfinite(hi))
    U = np.zeros((fin.size, n))
    U[np.arange(fin.size), fin] = 1.0
    A_le = np.vstack([A_ub, U])
    b_le = np.concatenate([b_ub - A_ub @ lo, (hi - lo)[fin]])
    b_e = b_eq - A_eq @ lo

    # row equilibration
    def _scale(A, b):
        s = np.abs(A).max(axis=1) if A.shape[0] else np.zeros(0)
        s[s == 0.0] = 1.0
        return A / s[:, None], b / s

    A_le, b_le = _scale(A_le, b_le)
    A_e, b_e = _scale(A_eq, b_e)

    m_le, m_e = A_le.shape[0], A_e.shape[0]
    m = m_le + m_e
    # columns: y (n) | slacks (m_le) | artificials (m)
    n_cols = n + m_le + m
    T = np.zeros((m + 1, n_cols + 1))
    T[:m_le, :n] = A_le
    T[:m_le, n:n + m_le] = np.eye(m_le)
    T[:m_le, -1] = b_le
    T[m_le:m, :n] = A_e
    T[m_le:m, -1] = b_e
    neg = T[:m, -1] < 0
    T[np.flatnonzero(neg)] *= -1.0

    basis = np.empty(m, dtype=int)
    art_rows = []
    for r in range(m):
        if r < m_le and not neg[r]:
            basis[r] = n + r
        else:
            a = n + m_le + r
            T[r, a] = 1.0
            basis[r] = a
            art_rows.append(r)

    it_total = 0
    if art_rows:
        T[-1, :] = 0.0
        T[-1, n + m_le + np.array(art_rows)] = 1.0
        for r in art_rows:
            T[-1] -= T[r]
        status, it = _iterate(T, basis, n_cols, max_iter, tol)
        it_total += it
        if status == ITERATION_LIMIT:
            return LpResult(status, None, np.nan, it_total)
        if -T[-1, -1] > 1e-8 * max(1.0, np.abs(T[:m, -1]).max(initial=0.0)):
            return LpResult(INFEASIBLE, None, np.inf, it_total)
        # drive leftover artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= n + m_le:
                cand = np.flatnonzero(np.abs(T[r, : n + m_le]) > 1e-9)
                if cand.size:
                    _pivot(T, r, cand[0])
                    basis[r] = cand[0]
                else:
                    keep[r] = False
        if not keep.all():
            T = np.vstack([T[:m][keep], T[-1:]])
            basis = basis[keep]
            m = int(keep.sum())

    # phase 2: artificial columns are frozen out by restricting n_cols
    n_cols2 = n + m_le
    T[:, n_cols2:-1] = 0.0
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        b = basis[r]
        if T[-1, b] != 0.0:
            T[-1] -= T[-1, b] * T[r]
    status, it = _iterate(T, basis, n_cols2, max_iter - it_total, tol)
    it_total += it
    if status != OPTIMAL:
        return LpResult(status, None, -np.inf if status == UNBOUNDED else np.nan, it_total)

    y = np.zeros(n_cols2)
    for r in range(m):
        if basis[r] < n_cols2:
            y[basis[r]] = T[r, -1]
    x = np.minimum(np.maximum(lo + y[:n], lo), hi)
    return LpResult(OPTIMAL, x, float(c @ x), it_total)

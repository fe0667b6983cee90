"""
Dense two-phase simplex with Bland's rule.

Solves  maximize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,
lower <= x <= upper  with finite lower bounds. Variables are shifted to
their lower bounds; finite upper bounds become extra rows.

The objective row holds z_j - c_j. The entering column is the smallest
index with a negative entry, the leaving row the minimum ratio with ties
broken by the smallest basic variable index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .config import FEASIBILITY_TOLERANCE, MAX_SIMPLEX_PIVOTS, PIVOT_TOLERANCE
from .errors import NumericFailureError


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None

    @property
    def num_vars(self) -> int:
        return len(self.c)


@dataclass
class LPResult:
    status: LPStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    pivots: int = 0


def _rows(matrix: Optional[np.ndarray], rhs: Optional[np.ndarray], n: int):
    if matrix is None or len(matrix) == 0:
        return np.zeros((0, n)), np.zeros(0)
    return np.atleast_2d(np.asarray(matrix, dtype=np.float64)), np.asarray(rhs, dtype=np.float64)


class _Tableau:
    """Tableau rows are constraints; the last row is the objective, the last column the rhs."""

    def __init__(self, table: np.ndarray, basis: List[int], pivot_budget: int):
        self.table = table
        self.basis = basis
        self.pivots = 0
        self.pivot_budget = pivot_budget

    def pivot(self, row: int, col: int) -> None:
        if self.pivots >= self.pivot_budget:
            raise NumericFailureError(f"simplex exceeded {self.pivot_budget} pivots")
        t = self.table
        t[row] /= t[row, col]
        for r in range(t.shape[0]):
            if r != row and t[r, col] != 0.0:
                t[r] -= t[r, col] * t[row]
        self.basis[row] = col
        self.pivots += 1

    def entering(self, allowed: int) -> int:
        candidates = np.flatnonzero(self.table[-1, :allowed] < -PIVOT_TOLERANCE)
        return int(candidates[0]) if len(candidates) else -1

    def leaving(self, col: int) -> int:
        best = -1
        best_ratio = np.inf
        for r in range(self.table.shape[0] - 1):
            a = self.table[r, col]
            if a <= PIVOT_TOLERANCE:
                continue
            ratio = self.table[r, -1] / a
            if ratio < best_ratio - 1e-12 or (abs(ratio - best_ratio) <= 1e-12 and self.basis[r] < self.basis[best]):
                best, best_ratio = r, ratio
        return best

    def run(self, allowed: int) -> bool:
        """Iterate to optimality; False when the objective is unbounded."""
        while True:
            col = self.entering(allowed)
            if col < 0:
                return True
            row = self.leaving(col)
            if row < 0:
                return False
            self.pivot(row, col)


def solve_lp(program: LinearProgram, max_pivots: int = MAX_SIMPLEX_PIVOTS) -> LPResult:
    """Solve a bounded-variable LP; raises NumericFailureError past the pivot cap."""
    c = np.asarray(program.c, dtype=np.float64)
    n = program.num_vars
    lower = np.asarray(program.lower, dtype=np.float64)
    upper = np.asarray(program.upper, dtype=np.float64)
    if not np.all(np.isfinite(lower)):
        raise ValueError("every variable needs a finite lower bound")
    if np.any(lower > upper):
        return LPResult(LPStatus.INFEASIBLE)

    A_ub, b_ub = _rows(program.A_ub, program.b_ub, n)
    A_eq, b_eq = _rows(program.A_eq, program.b_eq, n)
    # shift x = y + lower
    b_ub = b_ub - A_ub @ lower
    b_eq = b_eq - A_eq @ lower
    finite = np.flatnonzero(np.isfinite(upper))
    box = np.zeros((len(finite), n))
    box[np.arange(len(finite)), finite] = 1.0
    A_ub = np.vstack([A_ub, box])
    b_ub = np.concatenate([b_ub, (upper - lower)[finite]])

    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq
    flipped_ub = b_ub < 0
    needs_artificial = np.concatenate([flipped_ub, np.ones(m_eq, dtype=bool)])
    artificial_rows = np.flatnonzero(needs_artificial)
    n_art = len(artificial_rows)
    art_start = n + m_ub
    width = art_start + n_art

    table = np.zeros((m + 1, width + 1))
    table[:m_ub, :n] = A_ub
    table[:m_ub, n:n + m_ub] = np.eye(m_ub)
    table[:m_ub, -1] = b_ub
    table[m_ub:m, :n] = A_eq
    table[m_ub:m, -1] = b_eq
    negative = np.flatnonzero(table[:m, -1] < 0)
    table[negative, :] *= -1.0

    basis = [n + r for r in range(m_ub)] + [-1] * m_eq
    for k, r in enumerate(artificial_rows):
        table[r, art_start + k] = 1.0
        basis[r] = art_start + k

    tableau = _Tableau(table, basis, max_pivots)

    if n_art:
        # phase 1: maximize -sum(artificials)
        table[-1, :] = -table[artificial_rows, :].sum(axis=0)
        table[-1, art_start:width] = 0.0
        tableau.run(width)
        if table[-1, -1] < -FEASIBILITY_TOLERANCE:
            return LPResult(LPStatus.INFEASIBLE, pivots=tableau.pivots)
        redundant = []
        for r in range(m):
            if tableau.basis[r] < art_start:
                continue
            nonzero = np.flatnonzero(np.abs(table[r, :art_start]) > PIVOT_TOLERANCE)
            if len(nonzero):
                tableau.pivot(r, int(nonzero[0]))
            else:
                redundant.append(r)
        keep = [r for r in range(m + 1) if r not in redundant]
        tableau.table = table = np.delete(table[keep], np.s_[art_start:width], axis=1)
        tableau.basis = [tableau.basis[r] for r in keep[:-1]]

    # phase 2
    costs = np.zeros(art_start)
    costs[:n] = c
    table[-1, :] = 0.0
    table[-1, :n] = -c
    for r, var in enumerate(tableau.basis):
        if costs[var] != 0.0:
            table[-1] += costs[var] * table[r]
    if not tableau.run(art_start):
        return LPResult(LPStatus.UNBOUNDED, pivots=tableau.pivots)

    y = np.zeros(art_start)
    for r, var in enumerate(tableau.basis):
        y[var] = table[r, -1]
    x = np.maximum(y[:n], 0.0) + lower
    return LPResult(LPStatus.OPTIMAL, x=x, objective=float(c @ x), pivots=tableau.pivots)


def maximize(
    c: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    A_ub: Optional[np.ndarray] = None,
    b_ub: Optional[Sequence[float]] = None,
) -> LPResult:
    return solve_lp(LinearProgram(
        c=np.asarray(c, dtype=np.float64),
        lower=np.asarray(lower, dtype=np.float64),
        upper=np.asarray(upper, dtype=np.float64),
        A_ub=None if A_ub is None else np.asarray(A_ub, dtype=np.float64),
        b_ub=None if b_ub is None else np.asarray(b_ub, dtype=np.float64),
    ))

#!/usr/bin/env python3
"""
Tests for the simplex module, checked against scipy's linprog.

Run with: python -m pytest cegar_verifier/test_simplex.py -v
"""

import numpy as np
import pytest
from scipy.optimize import linprog

from cegar_verifier.errors import NumericFailureError
from cegar_verifier.simplex import LinearProgram, LPStatus, maximize, solve_lp


def _oracle(c, lower, upper, A_ub=None, b_ub=None, A_eq=None, b_eq=None):
    return linprog(
        -np.asarray(c),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=list(zip(lower, [None if np.isinf(u) else u for u in upper])),
        method="highs",
    )


# =============================================================================
# Small hand-checked programs
# =============================================================================

def test_box_only():
    """With only bounds each variable sits at the bound its cost prefers."""
    result = maximize([1.0, -2.0, 0.0], lower=[0.0, -1.0, 2.0], upper=[3.0, 1.0, 2.0])
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(5.0)
    assert result.x[0] == pytest.approx(3.0)
    assert result.x[1] == pytest.approx(-1.0)


def test_infeasible_program():
    """x0 + x1 <= -1 has no solution in the unit box."""
    result = maximize([1.0, 1.0], [0.0, 0.0], [1.0, 1.0], A_ub=[[1.0, 1.0]], b_ub=[-1.0])
    assert result.status is LPStatus.INFEASIBLE


def test_inverted_bounds_are_infeasible():
    """A lower bound above the upper bound is infeasible without pivoting."""
    result = maximize([1.0], [1.0], [0.0])
    assert result.status is LPStatus.INFEASIBLE
    assert result.pivots == 0


def test_unbounded_program():
    """Maximizing an unbounded variable."""
    result = solve_lp(LinearProgram(c=np.array([1.0]), lower=np.array([0.0]), upper=np.array([np.inf])))
    assert result.status is LPStatus.UNBOUNDED


def test_equality_constraints():
    """x0 + x1 = 1, x1 + x2 = 1, x0 + x2 = 1 forces every variable to 1/2."""
    A_eq = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]])
    result = solve_lp(LinearProgram(
        c=np.array([1.0, 0.0, 0.0]),
        lower=np.zeros(3),
        upper=np.full(3, np.inf),
        A_eq=A_eq,
        b_eq=np.ones(3),
    ))
    assert result.status is LPStatus.OPTIMAL
    assert np.allclose(result.x, 0.5)


def test_redundant_equality_rows():
    """A repeated equality row is dropped after phase one."""
    result = solve_lp(LinearProgram(
        c=np.array([1.0, 2.0]),
        lower=np.zeros(2),
        upper=np.array([5.0, 5.0]),
        A_eq=np.array([[1.0, 1.0], [2.0, 2.0]]),
        b_eq=np.array([3.0, 6.0]),
    ))
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(6.0)


def test_cycling_example_terminates():
    """A classic degenerate program that cycles under the largest-coefficient rule."""
    c = np.array([0.75, -20.0, 0.5, -6.0])
    A_ub = np.array([[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]])
    b_ub = np.array([0.0, 0.0, 1.0])
    result = maximize(c, np.zeros(4), np.full(4, np.inf), A_ub=A_ub, b_ub=b_ub)
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(1.25)
    assert result.pivots < 50


def test_pivot_cap():
    """Running out of pivots is a numeric failure, not a wrong answer."""
    program = LinearProgram(
        c=np.array([1.0, 1.0]),
        lower=np.zeros(2),
        upper=np.ones(2),
        A_ub=np.array([[1.0, 2.0]]),
        b_ub=np.array([2.5]),
    )
    with pytest.raises(NumericFailureError):
        solve_lp(program, max_pivots=1)


# =============================================================================
# Random programs against the oracle
# =============================================================================

@pytest.mark.parametrize("seed", range(60))
def test_matches_linprog_on_random_boxes(seed):
    """Random inequality LPs over a box: same status and optimal value as linprog."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    m = int(rng.integers(0, 6))
    c = rng.normal(size=n)
    lower = rng.uniform(-2.0, 0.0, size=n)
    upper = lower + rng.uniform(0.0, 3.0, size=n)
    A_ub = rng.normal(size=(m, n)) if m else None
    b_ub = rng.normal(size=m) if m else None

    result = maximize(c, lower, upper, A_ub=A_ub, b_ub=b_ub)
    oracle = _oracle(c, lower, upper, A_ub, b_ub)
    if oracle.status == 2:
        assert result.status is LPStatus.INFEASIBLE
        return
    assert oracle.status == 0
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(-oracle.fun, abs=1e-6)
    assert np.all(result.x >= lower - 1e-7) and np.all(result.x <= upper + 1e-7)
    if m:
        assert np.all(A_ub @ result.x <= b_ub + 1e-6)


@pytest.mark.parametrize("seed", range(30))
def test_matches_linprog_with_equalities(seed):
    """Mixed equality and inequality rows with free upper bounds."""
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 6))
    point = rng.uniform(0.0, 1.0, size=n)
    A_eq = rng.normal(size=(1, n))
    b_eq = A_eq @ point
    A_ub = rng.normal(size=(2, n))
    b_ub = A_ub @ point + rng.uniform(0.0, 1.0, size=2)
    c = rng.normal(size=n)
    lower, upper = np.zeros(n), np.full(n, 2.0)

    result = solve_lp(LinearProgram(c=c, lower=lower, upper=upper, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq))
    oracle = _oracle(c, lower, upper, A_ub, b_ub, A_eq, b_eq)
    assert oracle.status == 0
    assert result.status is LPStatus.OPTIMAL
    assert result.objective == pytest.approx(-oracle.fun, abs=1e-6)
    assert np.allclose(A_eq @ result.x, b_eq, atol=1e-6)

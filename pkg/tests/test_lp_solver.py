from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpisa.lp_solver import (
    Basis,
    FloatSolution,
    LpProblem,
    Status,
    _solve_basis_exact,
    rationalize_vertex,
    solve,
)
from oracles import _exact_solve


def box(n, objective, constraints=()):
    return LpProblem.from_constraints(n, objective, [(0, 1)] * n, constraints)


def test_min_x_on_unit_interval():
    sol = solve(box(1, [1]))
    assert sol.status is Status.OPTIMAL
    assert sol.vertex == (0,) and sol.objective_value == 0


def test_triangle():
    sol = solve(box(2, [-1, -1], [({0: 1, 1: 1}, "<=", 1)]))
    assert sol.objective_value == -1
    assert sum(sol.vertex) == 1
    assert all(v in (0, 1) for v in sol.vertex)


def test_degenerate_objective_is_deterministic():
    p = box(3, [0, 0, 0], [({0: 1, 1: 1, 2: 1}, "<=", 2)])
    first = solve(p)
    for _ in range(5):
        again = solve(p)
        assert again.vertex == first.vertex and again.basis == first.basis


def test_fractional_vertex_is_exact():
    # min -x - y - z s.t. x + y <= 1, y + z <= 1, x + z <= 1 -> (1/2, 1/2, 1/2)
    p = box(3, [-1, -1, -1], [({0: 1, 1: 1}, "<=", 1), ({1: 1, 2: 1}, "<=", 1), ({0: 1, 2: 1}, "<=", 1)])
    sol = solve(p)
    assert sol.vertex == (Fraction(1, 2),) * 3
    assert sol.objective_value == Fraction(-3, 2)


def test_infeasible():
    p = box(2, [1, 1], [({0: 1, 1: 1}, ">=", 3)])
    assert solve(p).status is Status.INFEASIBLE


def test_rejects_bad_data():
    with pytest.raises(ValueError):
        box(1, [0.5])
    with pytest.raises(ValueError):
        LpProblem.from_constraints(1, [1], [(0, np.inf)], [])
    with pytest.raises(ValueError):
        box(1, [1], [({3: 1}, "<=", 1)])
    with pytest.raises(ValueError):
        box(1, [1], [({0: 1}, "<>", 1)])


def test_rationalize_third():
    # 3 x = 1 with x basic and the row at its (equal) bounds
    p = LpProblem.from_constraints(1, [0], [(0, 1)], [({0: 3}, "=", 1)])
    fs = FloatSolution(np.array([0.3333333333333]), Basis("B", "L"))
    x, used_elim = rationalize_vertex(fs, p)
    assert x == [Fraction(1, 3)] and not used_elim


def test_rationalize_snaps_near_integer_by_basis():
    p = LpProblem.from_constraints(2, [0, 0], [(0, 1), (0, 1)], [({0: 1, 1: 1}, "=", 1)])
    fs = FloatSolution(np.array([1 - 1e-12, 1e-12]), Basis("BL", "L"))
    x, _ = rationalize_vertex(fs, p)
    assert x == [1, 0]


def test_rationalize_falls_back_to_elimination():
    # a float that limit_denominator cannot recover: 1/p for a large prime p
    p_big = 100_000_007
    p = LpProblem.from_constraints(1, [0], [(0, 1)], [({0: p_big}, "=", 1)])
    fs = FloatSolution(np.array([1 / p_big]), Basis("B", "L"))
    x, used_elim = rationalize_vertex(fs, p)
    assert x == [Fraction(1, p_big)] and used_elim


def _brute_force_min(num_vars, objective, cons):
    """Exact LP optimum by enumerating every basic point of the bounded region."""
    rows, rhs = [], []
    for j in range(num_vars):
        e = [0] * num_vars
        e[j] = 1
        rows += [e, [-v for v in e]]
        rhs += [1, 0]
    for coefs, rel, b in cons:
        a = [coefs.get(j, 0) for j in range(num_vars)]
        if rel in ("<=", "="):
            rows.append(a), rhs.append(b)
        if rel in (">=", "="):
            rows.append([-v for v in a]), rhs.append(-b)
    A, b = np.array(rows), np.array(rhs)
    best = None
    for sub in itertools.combinations(range(len(A)), num_vars):
        if abs(np.linalg.det(A[list(sub)])) < 1e-9:
            continue
        x = _exact_solve(A[list(sub)], b[list(sub)])
        if all(sum(int(a) * v for a, v in zip(arow, x)) <= bi for arow, bi in zip(A, b)):
            val = sum(c * v for c, v in zip(objective, x))
            best = val if best is None else min(best, val)
    return best


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 4))
    obj = [draw(st.integers(-3, 3)) for _ in range(n)]
    cons = []
    for _ in range(draw(st.integers(0, 4))):
        coefs = {j: draw(st.integers(-3, 3)) for j in range(n)}
        coefs = {j: v for j, v in coefs.items() if v}
        if coefs:
            cons.append((coefs, draw(st.sampled_from(["<=", ">=", "="])), draw(st.integers(-2, 3))))
    return n, obj, cons


@given(small_lps())
def test_optimum_matches_vertex_enumeration(lp):
    n, obj, cons = lp
    p = box(n, obj, cons)
    sol = solve(p)
    expected = _brute_force_min(n, obj, cons)
    if expected is None:
        assert sol.status is Status.INFEASIBLE
        return
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == expected
    x = sol.vertex
    assert sum(Fraction(int(c)) * v for c, v in zip(obj, x)) == sol.objective_value
    for coefs, rel, b in cons:
        act = sum(v * x[j] for j, v in coefs.items())
        assert {"<=": act <= b, ">=": act >= b, "=": act == b}[rel]
    assert all(0 <= v <= 1 for v in x)


@given(small_lps())
def test_exact_elimination_agrees_with_fast_path(lp):
    n, obj, cons = lp
    p = box(n, obj, cons)
    sol = solve(p)
    if sol.status is Status.OPTIMAL:
        assert tuple(_solve_basis_exact(p, sol.basis)) == sol.vertex
        assert solve(p).vertex == sol.vertex

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from envyfree import lp
from envyfree.erm import ef_program

import oracles


def test_trivial_optimum_at_origin():
    sol = lp.solve(lp.LinearProgram(c=[1, 1]))
    assert sol.status == lp.OPTIMAL
    assert sol.objective_value == 0.0


def test_segment_optimum():
    sol = lp.solve(lp.LinearProgram(c=[-1, 0], A_eq=[[1, 1]], b_eq=[1]))
    assert sol.status == lp.OPTIMAL
    assert sol.objective_value == pytest.approx(-1.0)


def test_infeasible():
    sol = lp.solve(lp.LinearProgram(c=[1], A_ge=[[1]], b_ge=[2], upper=[1]))
    assert sol.status == lp.INFEASIBLE


def test_unbounded():
    sol = lp.solve(lp.LinearProgram(c=[-1, 0], A_ge=[[1, -1]], b_ge=[0]))
    assert sol.status == lp.UNBOUNDED


def test_rejects_nan():
    with pytest.raises(ValueError):
        lp.LinearProgram(c=[np.nan])


def test_rejects_infinite_lower_bound():
    with pytest.raises(ValueError):
        lp.LinearProgram(c=[1.0], lower=[-np.inf])


def test_lower_bounds_shift():
    sol = lp.solve(lp.LinearProgram(c=[1, 2], lower=[1, -1], upper=[3, 4]))
    assert sol.objective_value == pytest.approx(-1.0)
    assert np.allclose(sol.z, [1, -1])


def test_redundant_equalities():
    sol = lp.solve(lp.LinearProgram(c=[1, 2], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2]))
    assert sol.status == lp.OPTIMAL
    assert sol.objective_value == pytest.approx(1.0)


def random_tiny_program(rng):
    n = int(rng.integers(1, 4))
    kw = {"c": rng.integers(-3, 4, n).astype(float)}
    m_ge = int(rng.integers(0, 4))
    if m_ge:
        kw["A_ge"] = rng.integers(-3, 4, (m_ge, n)).astype(float)
        kw["b_ge"] = rng.integers(-3, 4, m_ge).astype(float)
    if rng.random() < 0.4:
        kw["A_eq"] = rng.integers(-2, 3, (1, n)).astype(float)
        kw["b_eq"] = rng.integers(0, 4, 1).astype(float)
    if rng.random() < 0.3:
        kw["upper"] = rng.integers(1, 5, n).astype(float)
    return kw


def test_matches_vertex_enumeration_on_random_programs():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        kw = random_tiny_program(rng)
        status, value = oracles.lp_by_vertices(**kw)
        sol = lp.solve(lp.LinearProgram(**kw))
        assert sol.status == status, kw
        if status == "optimal":
            assert sol.objective_value == pytest.approx(value, abs=1e-7)


@pytest.mark.parametrize("rule", ["hybrid", "bland"])
def test_pricing_rules_agree(rule):
    rng = np.random.default_rng(8)
    U, L = rng.random((10, 3)), rng.random((10, 3))
    sol = lp.solve(ef_program(U, L), rule=rule)
    ref = lp.solve(ef_program(U, L), rule="hybrid")
    assert sol.objective_value == pytest.approx(ref.objective_value, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_ef_programs_match_scipy(n, k, seed):
    rng = np.random.default_rng(seed)
    U, L = rng.random((n, k)), rng.random((n, k))
    prog = ef_program(U, L)
    start = np.arange(n) * k + np.argmax(U, axis=1)
    sol = lp.solve(prog, start=start)
    ref = linprog(prog.c, A_ub=-prog.A_ge, b_ub=-prog.b_ge, A_eq=prog.A_eq, b_eq=prog.b_eq,
                  bounds=(0, None), method="highs")
    assert sol.status == lp.OPTIMAL
    assert sol.objective_value == pytest.approx(ref.fun, abs=1e-8)
    assert prog.residual(sol.z) <= 1e-7


def test_degenerate_program_terminates():
    # many constraints through the optimum: a classic cycling setup
    c = [-10, 57, 9, 24]
    A = -np.array([[0.5, -5.5, -2.5, 9], [0.5, -1.5, -0.5, 1], [1, 0, 0, 0]])
    sol = lp.solve(lp.LinearProgram(c=c, A_ge=A, b_ge=[0, 0, -1]), rule="bland")
    assert sol.status == lp.OPTIMAL
    assert sol.objective_value == pytest.approx(-1.0)

import numpy as np
import pytest

from mpcbounds import LpTableau, NumericalBreakdown, SizeExceeded, lp_solve
from mpcbounds.lp import INFEASIBLE, OPTIMAL, UNBOUNDED
from mpcbounds.vertexenum import brute_force_optimum


def test_minimize_with_ge_row():
    tab = LpTableau(objective=[1.0], A=[[1.0]], senses=[">="], b=[1.0])
    sol = lp_solve(tab)
    assert sol.status == OPTIMAL
    assert sol.x[0] == pytest.approx(1.0, abs=1e-12)
    assert sol.objective_value == pytest.approx(1.0, abs=1e-12)


def test_unbounded():
    tab = LpTableau(objective=[-1.0], A=np.zeros((0, 1)), senses=[], b=[])
    assert lp_solve(tab).status == UNBOUNDED


def test_infeasible():
    tab = LpTableau(objective=[0.0], A=[[1.0]], senses=["<="], b=[-1.0])
    assert lp_solve(tab).status == INFEASIBLE


def test_equality_and_bounds():
    # min x + y st x + y = 2, x <= 0.5
    tab = LpTableau(objective=[1.0, 1.0], A=[[1.0, 1.0]], senses=["="], b=[2.0],
                    ub=[0.5, np.inf])
    sol = lp_solve(tab)
    assert sol.status == OPTIMAL
    assert sol.objective_value == pytest.approx(2.0, abs=1e-12)
    assert sol.x[0] <= 0.5 + 1e-12


def test_lower_bound_shift():
    # min x with x >= -3 (lb), x <= -1
    tab = LpTableau(objective=[1.0], A=[[1.0]], senses=["<="], b=[-1.0], lb=[-3.0])
    sol = lp_solve(tab)
    assert sol.status == OPTIMAL
    assert sol.x[0] == pytest.approx(-3.0, abs=1e-12)


def test_objective_recompute_matches():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(2, 6))
        A = rng.normal(size=(3, n))
        b = rng.uniform(0.5, 2.0, 3)
        tab = LpTableau(objective=rng.normal(size=n),
                        A=np.vstack([A, np.ones(n)]), senses=["<="] * 4,
                        b=np.append(b, 5.0))
        sol = lp_solve(tab)
        assert sol.status == OPTIMAL
        assert sol.objective_value == pytest.approx(float(tab.objective @ sol.x), rel=1e-10)


def test_determinism_bit_identical():
    rng = np.random.default_rng(5)
    A = np.vstack([rng.normal(size=(4, 6)), np.ones(6)])
    b = np.append(rng.uniform(1, 2, 4), 8.0)
    c = rng.normal(size=6)
    tab1 = LpTableau(objective=c, A=A, senses=["<="] * 5, b=b)
    tab2 = LpTableau(objective=c.copy(), A=A.copy(), senses=["<="] * 5, b=b.copy())
    s1, s2 = lp_solve(tab1), lp_solve(tab2)
    assert np.array_equal(s1.x, s2.x)
    assert s1.objective_value == s2.objective_value


def test_solve_does_not_mutate_input():
    A = np.array([[1.0, 2.0], [3.0, 1.0]])
    b = np.array([2.0, 3.0])
    c = np.array([-1.0, -1.0])
    tab = LpTableau(objective=c, A=A, senses=["<=", "<="], b=b)
    A0, b0, c0 = tab.A.copy(), tab.b.copy(), tab.objective.copy()
    lp_solve(tab)
    assert np.array_equal(tab.A, A0) and np.array_equal(tab.b, b0)
    assert np.array_equal(tab.objective, c0)


def test_size_cap():
    n = 501
    with pytest.raises(SizeExceeded):
        lp_solve(LpTableau(objective=np.zeros(n), A=np.zeros((1, n)),
                           senses=["<="], b=[1.0]))


def random_bounded_lp(rng):
    """Feasible (x = 0 works) and bounded (simplex row caps everything)."""
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 5))
    rows = [rng.normal(size=n) for _ in range(m)]
    senses = ["<="] * m
    b = list(rng.uniform(0.2, 2.0, m))
    rows.append(np.ones(n))
    senses.append("<=")
    b.append(float(rng.uniform(2.0, 6.0)))
    if rng.random() < 0.4:  # an occasional >= row that keeps x = 0 feasible
        rows.append(-rng.uniform(0.1, 1.0, size=n))
        senses.append(">=")
        b.append(float(-rng.uniform(0.5, 2.0)))
    return LpTableau(objective=rng.normal(size=n), A=np.array(rows), senses=senses,
                     b=np.array(b))


def test_fuzz_vs_vertex_enumeration():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(120):
        tab = random_bounded_lp(rng)
        sol = lp_solve(tab)
        assert sol.status == OPTIMAL
        ref, _ = brute_force_optimum(tab)
        assert ref is not None
        assert sol.objective_value == pytest.approx(ref, abs=1e-8)
        checked += 1
    assert checked == 120


def test_degenerate_lp_terminates():
    # many redundant active rows at the optimum; Bland must not cycle
    n = 4
    A = np.vstack([np.eye(n), np.eye(n), np.ones((1, n))])
    b = np.zeros(2 * n + 1)
    b[-1] = 1.0
    tab = LpTableau(objective=-np.ones(n), A=A, senses=["<="] * n + ["<="] * n + ["="], b=b)
    sol = lp_solve(tab)
    assert sol.status == INFEASIBLE  # x_i <= 0 and sum = 1 cannot hold
    A2 = np.vstack([np.eye(n), np.ones((1, n))])
    b2 = np.append(np.full(n, 0.5), 1.0)
    sol2 = lp_solve(LpTableau(objective=-np.ones(n), A=A2,
                              senses=["<="] * n + ["="], b=b2))
    assert sol2.status == OPTIMAL
    assert sol2.objective_value == pytest.approx(-1.0, abs=1e-12)

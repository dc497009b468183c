import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import small_instance
from protophon.milp import BigMConfig, MilpModel, build_model
from protophon.solver import (
    Infeasible,
    ModelTooLarge,
    NoIncumbent,
    SolveOptions,
    Status,
    TooLarge,
    brute_force_solve,
    export_lp,
    parse_lp,
    solve,
)
from protophon.solver.highs import solve_highs
from protophon.solver.lpfile import lp_names
from protophon.solver.simplex import BoundedSimplex, LPStatus


def make_model(c, A, sense, rhs, lb, ub, binary=None) -> MilpModel:
    n = len(c)
    return MilpModel(
        names=[f"x{i}" for i in range(n)],
        lb=np.asarray(lb, float),
        ub=np.asarray(ub, float),
        binary=np.zeros(n, bool) if binary is None else np.asarray(binary, bool),
        c=np.asarray(c, float),
        A=sp.csr_matrix(np.asarray(A, float).reshape(-1, n)),
        sense=np.asarray(sense, dtype="<U1"),
        rhs=np.asarray(rhs, float),
        row_names=[f"r{i}" for i in range(len(rhs))],
    )


def _linprog(c, A, sense, rhs, lb, ub):
    le, ge, eq = sense == "L", sense == "G", sense == "E"
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([rhs[le], -rhs[ge]])
    return linprog(
        c,
        A_ub=A_ub if len(A_ub) else None,
        b_ub=b_ub if len(b_ub) else None,
        A_eq=A[eq] if eq.any() else None,
        b_eq=rhs[eq] if eq.any() else None,
        bounds=list(zip(lb, ub)),
    )


def _random_lp(rng):
    m, n = int(rng.integers(1, 8)), int(rng.integers(1, 8))
    A = rng.integers(-3, 4, (m, n)).astype(float)
    sense = rng.choice(np.array(list("LGE")), m, p=[0.45, 0.45, 0.1])
    rhs = rng.integers(-5, 6, m).astype(float)
    c = rng.integers(-3, 4, n).astype(float)
    lb = rng.integers(-3, 1, n).astype(float)
    ub = lb + rng.integers(0, 5, n)
    return c, A, sense, rhs, lb, ub


# ---------------------------------------------------------------------------
# simplex

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_simplex_matches_linprog(seed):
    rng = np.random.default_rng(seed)
    c, A, sense, rhs, lb, ub = _random_lp(rng)
    lp = BoundedSimplex(A, sense, rhs, c)
    res = lp.solve(lb, ub)
    ref = _linprog(c, A, sense, rhs, lb, ub)
    if ref.status == 2:
        assert res.status is LPStatus.INFEASIBLE
        return
    assert res.status is LPStatus.OPTIMAL
    assert res.objective == pytest.approx(ref.fun, abs=1e-7)
    model = make_model(c, A, sense, rhs, lb, ub)
    assert model.violation(res.x) <= 1e-9

    # warm start after fixing one variable, as branch-and-bound does
    j = int(rng.integers(len(c)))
    ub2 = ub.copy()
    ub2[j] = lb[j]
    warm = lp.solve(lb, ub2, warm=res.basis)
    ref2 = _linprog(c, A, sense, rhs, lb, ub2)
    if ref2.status == 2:
        assert warm.status is LPStatus.INFEASIBLE
    else:
        assert warm.status is LPStatus.OPTIMAL
        assert warm.objective == pytest.approx(ref2.fun, abs=1e-7)


def test_simplex_terminates_on_cycling_example():
    # the classic degenerate LP on which textbook Dantzig pivoting cycles
    c = np.array([-0.75, 20, -0.5, 6])
    A = np.array([[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]])
    res = BoundedSimplex(A, np.array(["L", "L", "L"]), np.array([0, 0, 1.0]), c, scale=False).solve(
        np.zeros(4), np.full(4, np.inf)
    )
    assert res.status is LPStatus.OPTIMAL
    assert res.objective == pytest.approx(-1.25)


def test_simplex_unbounded_and_infeasible():
    lp = BoundedSimplex(np.array([[1.0, -1.0]]), np.array(["L"]), np.array([1.0]), np.array([-1.0, 0.0]))
    assert lp.solve(np.zeros(2), np.full(2, np.inf)).status is LPStatus.UNBOUNDED
    lp = BoundedSimplex(np.array([[1.0, 1.0]]), np.array(["G"]), np.array([5.0]), np.zeros(2))
    assert lp.solve(np.zeros(2), np.ones(2)).status is LPStatus.INFEASIBLE


# ---------------------------------------------------------------------------
# branch-and-bound

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bnb_matches_highs_on_random_milps(seed):
    rng = np.random.default_rng(seed)
    c, A, sense, rhs, lb, ub = _random_lp(rng)
    binary = rng.random(len(c)) < 0.6
    lb[binary], ub[binary] = 0.0, 1.0
    model = make_model(c, A, sense, rhs, lb, ub, binary)
    ref = solve_highs(model, SolveOptions(mip_gap=0))
    if ref.status is Status.INFEASIBLE:
        with pytest.raises(Infeasible):
            solve(model, SolveOptions(mip_gap=0))
        return
    sol = solve(model, SolveOptions(mip_gap=0))
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(ref.objective, abs=1e-7)
    assert model.violation(sol.x) <= 1e-6
    assert sol.bound <= sol.objective + 1e-9


def test_trivial_single_entry_model():
    from protophon.milp import Entry, ReconstructionProblem
    from protophon.phonology import parse_phoneme

    model = build_model(ReconstructionProblem([Entry("a", {"v": parse_phoneme("m")})]))
    sol = solve(model, SolveOptions(mip_gap=0))
    assert sol.status is Status.OPTIMAL and sol.objective == pytest.approx(0, abs=1e-9)


def test_binary_link_forces_discreteness():
    # x = b+ - b-, b+ + b- = b, x >= 0.3: minimising x still lands on 1
    model = make_model(
        c=[1, 0, 0, 0],
        A=[[1, -1, 1, 0], [0, 1, 1, -1], [1, 0, 0, 0]],
        sense=["E", "E", "G"],
        rhs=[0, 0, 0.3],
        lb=[-1, 0, 0, 0],
        ub=[1, 1, 1, 1],
        binary=[False, True, True, True],
    )
    sol = solve(model, SolveOptions(mip_gap=0))
    assert sol.x[0] == pytest.approx(1.0)


def test_infeasible_and_too_large():
    model = make_model([1, 1], [[1, 1]], ["G"], [3], [0, 0], [1, 1], [True, True])
    with pytest.raises(Infeasible):
        solve(model, SolveOptions())
    with pytest.raises(ModelTooLarge):
        solve(model, SolveOptions(max_vars=1))


def test_node_limit_reports_incumbent_and_gap():
    p, _ = small_instance(18)
    model = build_model(p)
    try:
        sol = solve(model, SolveOptions(mip_gap=0, node_limit=5))
    except NoIncumbent:
        return
    assert sol.status in (Status.TIME_LIMIT, Status.GAP_REACHED, Status.OPTIMAL)
    assert model.violation(sol.x) <= 1e-6
    assert sol.bound <= sol.objective + 1e-9
    assert sol.gap == pytest.approx((sol.objective - sol.bound) / max(abs(sol.objective), 1e-10))


def test_options_validate():
    with pytest.raises(ValueError):
        SolveOptions(mip_gap=-1)
    with pytest.raises(ValueError):
        SolveOptions(time_limit=0)


def test_deterministic_and_worker_independent():
    p, _ = small_instance(6)
    model = build_model(p)
    a = solve(model, SolveOptions(mip_gap=0))
    b = solve(model, SolveOptions(mip_gap=0))
    c = solve(model, SolveOptions(mip_gap=0, workers=2))
    assert np.array_equal(a.x, b.x) and a.nodes == b.nodes
    assert c.objective == pytest.approx(a.objective, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_bnb_matches_oracles(seed):
    p, sub = small_instance(seed)
    model = build_model(p, BigMConfig())
    sol = solve(model, SolveOptions(mip_gap=0))
    exact = brute_force_solve(p, sub, blockwise=True)
    joint = brute_force_solve(p, sub)
    assert sol.objective == pytest.approx(exact.objective, rel=1e-4)
    assert sol.objective <= joint.objective + 1e-6
    assert exact.objective <= joint.objective + 1e-9


# ---------------------------------------------------------------------------
# brute force

def test_brute_force_identical_readings():
    from protophon.milp import Entry, ReconstructionProblem, SpellerPair
    from protophon.phonology import PhonemeInventory

    inv = PhonemeInventory.from_symbols(["p", "b", "m"])
    p = ReconstructionProblem([Entry("a", {"x": inv.vector("m")}), Entry("b", {"x": inv.vector("m")})], [SpellerPair("a", "b")])
    sol = brute_force_solve(p, inv)
    assert sol.objective == 0 and sol.assignment == {"a": "m", "b": "m"}


def test_brute_force_tie_is_lexicographic():
    from protophon.milp import Entry, ReconstructionProblem
    from protophon.phonology import PhonemeInventory

    inv = PhonemeInventory.from_symbols(["p", "b"])
    p = ReconstructionProblem([Entry("a", {"x": inv.vector("p"), "y": inv.vector("b")})])
    assert brute_force_solve(p, inv).assignment == {"a": "b"}


def test_brute_force_refuses_huge_search(inventory):
    from protophon.milp import Entry, ReconstructionProblem

    p = ReconstructionProblem([Entry(f"e{i}", {"x": inventory.vector("p")}) for i in range(4)])
    with pytest.raises(TooLarge):
        brute_force_solve(p, inventory)


# ---------------------------------------------------------------------------
# LP export

def test_lp_minimal_models():
    empty = make_model([0, 0], [[1, 1]], ["L"], [1], [0, 0], [1, 1])
    text = export_lp(empty)
    assert "Minimize" in text and " obj: 0" in text
    assert "Subject To\n r0: 1 x0 + 1 x1 <= 1\n" in text
    assert text.rstrip().endswith("End")


@pytest.mark.parametrize("seed", range(3))
def test_lp_round_trip(seed):
    p, _ = small_instance(seed)
    model = build_model(p)
    text = export_lp(model)
    assert export_lp(model) == text
    q = parse_lp(text)
    order = [q.var_names.index(n) for n in lp_names(model.names, "v")]
    assert np.array_equal(q.c[order], model.c)
    assert np.array_equal(q.lb[order], model.lb) and np.array_equal(q.ub[order], model.ub)
    assert np.array_equal(q.binary[order], model.binary)
    assert np.allclose(q.A[:, order].toarray(), model.A.toarray(), rtol=0, atol=0)
    assert np.array_equal(q.sense, model.sense) and np.array_equal(q.rhs, model.rhs)


def test_lp_names_are_safe_and_unique():
    names = lp_names(["F[a,1]", "F[a,1]", "1x", "e3", "t[q~0,2]", "ü+"], "v")
    assert len(set(names)) == len(names)
    for n in names:
        assert not n[0].isdigit() and n[0] not in "eE." and " " not in n
        assert all(ch.isascii() for ch in n) and "+" not in n and "[" not in n

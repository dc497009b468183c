import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_instance
from protophon import phonology as ph
from protophon.milp import (
    BigMConfig,
    EmptyProblem,
    Entry,
    InvalidWeight,
    ReconstructionProblem,
    SpellerPair,
    build_model,
    complete_assignment,
    exact_objective,
    surrogate_objective,
)
from protophon.phonology import build_inventory, build_schema, parse_phoneme
from protophon.solver import SolveOptions, solve


def test_single_entry_recovers_reading():
    p = ReconstructionProblem([Entry("a", {"v": parse_phoneme("f")})])
    model = build_model(p)
    sol = solve(model, SolveOptions(mip_gap=0))
    assert sol.objective == pytest.approx(0, abs=1e-9)
    assert np.allclose(sol.x[model.feature_vars["a"]], parse_phoneme("f"))


def test_pair_of_identical_readings():
    v = parse_phoneme("tʃʰ")
    p = ReconstructionProblem(
        [Entry("a", {"x": v}), Entry("b", {"x": v})], [SpellerPair("a", "b")]
    )
    model = build_model(p)
    sol = solve(model, SolveOptions(mip_gap=0))
    assert sol.objective == pytest.approx(0, abs=1e-9)
    for e in "ab":
        assert np.allclose(sol.x[model.feature_vars[e]], v)


def test_feature_variables_carry_schema_bounds():
    p, _ = small_instance(0)
    model = build_model(p)
    s = build_schema()
    for idx in model.feature_vars.values():
        assert len(idx) == 14
        assert np.array_equal(model.lb[idx], s.lower)
        assert np.array_equal(model.ub[idx], s.upper)
    assert (model.c[model.roles["distance"]] > 0).all()
    assert (model.c >= 0).all()


def test_validation_errors():
    with pytest.raises(EmptyProblem):
        ReconstructionProblem([]).validate()
    e = [Entry("a", {"v": parse_phoneme("p")})]
    for lam in (-0.1, 1.0, 2.0):
        with pytest.raises(InvalidWeight):
            ReconstructionProblem(e, lambda_fq=lam).validate()
    with pytest.raises(InvalidWeight):
        ReconstructionProblem(e, k_medial=0.5).validate()
    with pytest.raises(KeyError):
        ReconstructionProblem(e, [SpellerPair("a", "zz")]).validate()


def test_model_size_is_linear():
    sizes = []
    for n in (2, 4, 8):
        entries = [Entry(f"e{i}", {"A": parse_phoneme("p"), "B": parse_phoneme("m")}) for i in range(n)]
        pairs = [SpellerPair(f"e{i}", f"e{i + 1}") for i in range(n - 1)]
        m = build_model(ReconstructionProblem(entries, pairs))
        sizes.append((m.n_vars, m.n_rows))
    dv = [b[0] - a[0] for a, b in zip(sizes, sizes[1:])]
    dr = [b[1] - a[1] for a, b in zip(sizes, sizes[1:])]
    assert dv[1] == 2 * dv[0] and dr[1] == 2 * dr[0]


def test_case_three_link_forces_discreteness():
    # a reading with labial on and labiodental at 0.3: the sign binaries only allow +-1
    v = parse_phoneme("p").copy()
    v[ph.LABIODENTAL] = 0.3
    model = build_model(ReconstructionProblem([Entry("a", {"v": v})]))
    sol = solve(model, SolveOptions(mip_gap=0))
    F = sol.x[model.feature_vars["a"]]
    assert F[ph.LABIODENTAL] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective == pytest.approx(0.5 * 0.7, abs=1e-9)  # reading weight 1 - lambda


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), pick=st.lists(st.integers(0, 10_000), min_size=3, max_size=3))
def test_every_inventory_assignment_is_feasible(seed, pick):
    p, sub = small_instance(seed)
    opts = BigMConfig()
    model = build_model(p, opts)
    recon = {e.id: sub.vectors[k % len(sub)] for e, k in zip(p.entries, pick)}
    x = complete_assignment(model, recon)
    assert model.violation(x) <= 1e-9
    # at valid phonemes the surrogate and exact objectives agree
    assert model.objective(x) == pytest.approx(exact_objective(p, recon), abs=1e-9)
    assert surrogate_objective(p, recon, opts) == pytest.approx(exact_objective(p, recon), abs=1e-9)


def test_zero_initial_assignment_feasible():
    inv = build_inventory()
    p = ReconstructionProblem(
        [Entry("a", {"v": inv.vector("")}), Entry("b", {"v": inv.vector("kʷʰ")})], [SpellerPair("a", "b")]
    )
    model = build_model(p)
    for ra, rb in (("", "kʷʰ"), ("kʷʰ", ""), ("", "")):
        x = complete_assignment(model, {"a": inv.vector(ra), "b": inv.vector(rb)})
        assert model.violation(x) <= 1e-9


def test_lambda_zero_drops_pair_terms():
    p, _ = small_instance(3)
    assert p.speller_pairs
    p0 = ReconstructionProblem(p.entries, p.speller_pairs, lambda_fq=0.0)
    m0, m5 = build_model(p0), build_model(p)
    assert not any(n.startswith("t[fq") for n in m0.names)
    assert any(n.startswith("t[fq") for n in m5.names)


def test_medial_weight_scales_pair_terms():
    v1, v2 = parse_phoneme("p"), parse_phoneme("b")
    entries = [Entry("a", {"x": v1}), Entry("b", {"x": v2})]
    base = build_model(ReconstructionProblem(entries, [SpellerPair("a", "b", medial_match=False)], k_medial=3))
    heavy = build_model(ReconstructionProblem(entries, [SpellerPair("a", "b", medial_match=True)], k_medial=3))
    pair = [i for i, n in enumerate(base.names) if n.startswith(("t[fq", "g[fq"))]
    assert np.allclose(heavy.c[pair], 3 * base.c[pair])

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import protophon.phonology as ph
from protophon.evaluation import (
    DegeneratePool,
    IdMismatch,
    avg_l1,
    equal_rate,
    evaluate,
    majority_vote_feature,
    majority_vote_ipa,
    matching_rate,
    sound_rate,
    two_proportion_z,
)
from protophon.phonology import build_inventory, parse_phoneme, soundness_distance

INV = build_inventory()


def vectors(symbols):
    return {f"e{i}": INV.vector(s) for i, s in enumerate(symbols)}


def table3_vector():
    v = np.zeros(14)
    v[[ph.SONORITY, ph.DELAYED_RELEASE]] = 1.048, 0.905
    v[[ph.LABIAL, ph.LABIODENTAL]] = 0.946, -0.919
    v[[ph.CORONAL, ph.ANTERIOR, ph.DISTRIBUTED]] = 0.499, 0.988, 0.499
    v[[ph.DORSAL, ph.HIGH, ph.FRONT]] = 0.992, 1.952, 2.889
    return v


def test_equal_rate_examples():
    truth = vectors("p b m f v t d s z n".split())
    assert equal_rate(truth, truth) == 1.0 and avg_l1(truth, truth) == 0.0
    recon = dict(truth)
    recon["e3"] = recon["e3"] + 0.5 * np.eye(14)[0]
    assert equal_rate(recon, truth) == pytest.approx(0.9)
    assert avg_l1(recon, truth) == pytest.approx(0.05)


def test_equal_rate_needs_matching_ids():
    truth = vectors(["p", "b"])
    with pytest.raises(IdMismatch):
        equal_rate({"e0": truth["e0"]}, truth)


def test_sound_rate_examples():
    recon = vectors(INV.symbols[:10])
    assert sound_rate(vectors(INV.symbols)) == 1.0
    recon["bad"] = table3_vector()
    assert sound_rate(recon) == pytest.approx(10 / 11)


def test_matching_rate_examples():
    recon = vectors(["p", "p", "b", "b"])
    assert matching_rate(recon, [("e0", "e1"), ("e2", "e3")]) == (1.0, 0.0)
    recon["e3"] = recon["e2"] + np.eye(14)[5]
    assert matching_rate(recon, [("e0", "e1"), ("e2", "e3")]) == pytest.approx((0.5, 0.5))
    with pytest.raises(IdMismatch):
        matching_rate(recon, [("e0", "zz")])


def test_majority_votes_when_varieties_agree():
    var = {v: {"a": "ts", "b": "m"} for v in ("v1", "v2", "v3")}
    for vote in (majority_vote_ipa(var), majority_vote_feature(var)):
        assert np.array_equal(vote["a"], parse_phoneme("ts"))
        assert np.array_equal(vote["b"], parse_phoneme("m"))


def test_ipa_vote_takes_the_mode():
    var = {"v1": {"a": "p"}, "v2": {"a": "p"}, "v3": {"a": "b"}}
    assert np.array_equal(majority_vote_ipa(var)["a"], parse_phoneme("p"))


def test_ipa_vote_breaks_ties_lexicographically():
    var = {"v1": {"a": "p"}, "v2": {"a": "b"}}
    assert np.array_equal(majority_vote_ipa(var)["a"], parse_phoneme("b"))


def test_feature_vote_is_coordinatewise_and_may_be_unsound():
    readings = ["p", "m", "l"]
    var = {f"v{i}": {"a": s} for i, s in enumerate(readings)}
    vote = majority_vote_feature(var)["a"]
    X = np.array([parse_phoneme(s) for s in readings])
    for j in range(14):
        vals, counts = np.unique(X[:, j], return_counts=True)
        assert vote[j] == vals[counts == counts.max()].min()
    assert soundness_distance(vote) > 0
    # the IPA vote always returns a reading, hence a phoneme
    assert soundness_distance(majority_vote_ipa(var)["a"]) == 0


@pytest.mark.parametrize(
    "args, z",
    [((1.0, 1078, 0.9733, 3138), 5.4191), ((0.9826, 1037, 0.9731, 3158), 1.7152)],
)
def test_z_reference_rows(args, z):
    assert two_proportion_z(*args) == pytest.approx(z, abs=1e-3)


@given(st.floats(0.01, 0.99), st.integers(1, 5000), st.floats(0.01, 0.99), st.integers(1, 5000))
def test_z_is_antisymmetric(a, n1, b, n2):
    assert two_proportion_z(a, n1, b, n2) == pytest.approx(-two_proportion_z(b, n2, a, n1), abs=1e-9)
    assert two_proportion_z(a, n1, a, n2) == pytest.approx(0.0, abs=1e-9)


def test_z_degenerate_pool():
    with pytest.warns(DegeneratePool):
        assert two_proportion_z(1.0, 10, 1.0, 20) == 0.0
    with pytest.warns(DegeneratePool):
        assert two_proportion_z(0.0, 10, 0.0, 20) == 0.0
    with pytest.raises(ValueError):
        two_proportion_z(0.5, 0, 0.5, 10)
    with pytest.raises(ValueError):
        two_proportion_z(1.5, 10, 0.5, 10)


@given(st.lists(st.sampled_from(INV.symbols), min_size=1, max_size=12), st.integers(0, 2**31))
def test_report_rates_lie_in_unit_interval(syms, seed):
    rng = np.random.default_rng(seed)
    truth = vectors(syms)
    recon = {k: v + rng.integers(-1, 2, 14) * (rng.random(14) < 0.2) for k, v in truth.items()}
    ids = sorted(truth)
    pairs = [(ids[i], ids[(i + 1) % len(ids)]) for i in range(len(ids))]
    rep = evaluate(recon, truth, pairs)
    for r in (rep.equal_rate, rep.sound_rate, rep.matching_rate):
        assert 0.0 <= r <= 1.0
    assert rep.n == len(syms) and rep.n_pairs == len(pairs)
    assert rep.avg_l1 >= 0 and rep.avg_l2 >= 0
    assert math.isnan(evaluate(recon).equal_rate)

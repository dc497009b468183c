import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_mutual_info_score

from protophon.clustering import (
    DegenerateLabeling,
    Labeling,
    TooFewPoints,
    ami,
    contingency,
    entropy,
    expected_mutual_information,
    kmeans,
    mutual_information,
)
from protophon.evaluation import IdMismatch


def lab(labels):
    return Labeling.from_labels({f"x{i:03d}": l for i, l in enumerate(labels)})


labels = st.lists(st.integers(0, 4), min_size=2, max_size=40)


def _ami_by_enumeration(a, b):
    """AMI with E[MI] averaged over every permutation of the first labeling."""
    t = contingency(lab(a), lab(b))
    mi = mutual_information(t)
    perms = list(itertools.permutations(a))
    emi = sum(mutual_information(contingency(lab(p), lab(b))) for p in perms) / len(perms)
    hu, hv = entropy(t.sum(axis=1)), entropy(t.sum(axis=0))
    return (mi - emi) / (0.5 * (hu + hv) - emi)


@pytest.mark.parametrize("a, b", [([0, 0, 1, 1], [0, 1, 0, 1]), ([0, 0, 1, 1], [0, 0, 0, 1]), ([0, 1, 1, 2, 2, 2], [1, 1, 0, 0, 2, 2])])
def test_ami_matches_enumeration(a, b):
    assert ami(lab(a), lab(b)) == pytest.approx(_ami_by_enumeration(a, b), abs=1e-12)


@settings(max_examples=200)
@given(st.data())
def test_ami_matches_sklearn(data):
    a = data.draw(labels)
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ours = ami(lab(a), lab(b))
    if len(set(a)) == 1 or len(set(b)) == 1:
        assert ours == 0.0
        return
    ref = adjusted_mutual_info_score(a, b, average_method="arithmetic")
    assert ours == pytest.approx(ref, abs=1e-9)


@given(st.data())
def test_ami_symmetric_and_permutation_invariant(data):
    a = data.draw(labels)
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    perm = data.draw(st.permutations(range(5)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        x = ami(lab(a), lab(b))
        assert x == pytest.approx(ami(lab(b), lab(a)), abs=1e-12)
        assert x == pytest.approx(ami(lab([perm[i] for i in a]), lab(b)), abs=1e-12)
        assert x <= 1.0


def test_ami_of_identical_labelings_is_one():
    u = lab([0, 0, 1, 1, 2, 2, 2, 3])
    assert ami(u, u) == pytest.approx(1.0)


def test_degenerate_labeling_gives_zero():
    with pytest.warns(DegenerateLabeling):
        assert ami(lab([0, 0, 0]), lab([0, 1, 2])) == 0.0


def test_contingency_needs_same_ids():
    with pytest.raises(IdMismatch):
        contingency(Labeling({"a": 0}), Labeling({"b": 0}))


def test_expected_mi_bounds():
    t = contingency(lab([0, 0, 1, 1, 2]), lab([0, 1, 1, 2, 2]))
    assert 0.0 <= expected_mutual_information(t) <= mutual_information(t) + 1.0


def test_from_labels_is_dense_and_ordered():
    u = Labeling.from_labels({"b": "q", "a": "z", "c": "z"})
    assert u.assignment == {"a": 0, "b": 1, "c": 0} and u.k == 2


def test_labeling_tsv_round_trip(tmp_path):
    u = lab([2, 2, 0, 1])
    assert Labeling.from_tsv(u.to_tsv(tmp_path / "l.tsv")) == u


# ---------------------------------------------------------------------------
# k-means

def test_kmeans_with_k_equal_n_has_zero_wcss():
    pts = {f"p{i}": v for i, v in enumerate(np.eye(5))}
    labeling, wcss = kmeans(pts, 5)
    assert wcss == pytest.approx(0.0) and labeling.k == 5


def test_kmeans_separates_blobs():
    rng = np.random.default_rng(0)
    centers = np.array([[0, 0], [10, 0], [0, 10]])
    pts, truth = {}, {}
    for c in range(3):
        for i in range(20):
            key = f"{c}-{i:02d}"
            pts[key] = centers[c] + rng.normal(0, 0.5, 2)
            truth[key] = c
    labeling, _ = kmeans(pts, 3, seed=4)
    assert ami(labeling, Labeling.from_labels(truth)) == pytest.approx(1.0)


def test_kmeans_is_deterministic_and_worker_independent():
    rng = np.random.default_rng(1)
    pts = {f"p{i:02d}": rng.integers(-2, 3, 6).astype(float) for i in range(60)}
    a = kmeans(pts, 6, seed=3)
    b = kmeans(pts, 6, seed=3)
    c = kmeans(pts, 6, seed=3, workers=3)
    assert a == b == c


def test_kmeans_needs_enough_distinct_points():
    pts = {"a": np.zeros(2), "b": np.zeros(2), "c": np.ones(2)}
    with pytest.raises(TooFewPoints):
        kmeans(pts, 3)
    with pytest.raises(TooFewPoints):
        kmeans(pts, 0)

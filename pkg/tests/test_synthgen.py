import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protophon.dataset import ingest, read_symbol_table
from protophon.phonology import build_inventory, named_system, soundness_distance
from protophon.synthgen import GenerationConfig, change_candidates, generate, write_dataset

SMALL = dict(m_range=(6, 9), n_range=(3, 6), num_varieties=4)


def test_same_seed_same_dataset():
    a = generate(GenerationConfig(**SMALL, seed=11))
    b = generate(GenerationConfig(**SMALL, seed=11))
    c = generate(GenerationConfig(**SMALL, seed=12))
    assert a.characters == b.characters and a.varieties == b.varieties and a.speller_pairs == b.speller_pairs
    assert (a.characters, a.varieties) != (c.characters, c.varieties)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 12), st.integers(0, 5), st.integers(1, 5), st.integers(0, 4))
def test_system_size_within_ranges(seed, m_lo, m_w, n_lo, n_w):
    cfg = GenerationConfig(m_range=(m_lo, m_lo + m_w), n_range=(n_lo, n_lo + n_w), num_varieties=1, seed=seed)
    ds = generate(cfg)
    assert m_lo <= len(ds.initials) <= m_lo + m_w
    assert len(set(ds.initials)) == len(ds.initials)
    for s in ds.initials:
        n = sum(v == s for v in ds.characters.values())
        assert n_lo <= n <= n_lo + n_w


def test_named_system_is_used_verbatim():
    ds = generate(GenerationConfig(system="latin", n_range=(2, 2), num_varieties=1))
    assert ds.initials == named_system("latin")
    assert len(ds.characters) == 2 * len(ds.initials)


def test_no_speller_noise():
    ds = generate(GenerationConfig(**SMALL, p_fq=0.0))
    assert ds.speller_pairs and not any(p.corrupted for p in ds.speller_pairs)
    for p in ds.speller_pairs:
        assert p.x != p.xu and ds.characters[p.x] == ds.characters[p.xu]


def test_all_spellers_corrupted():
    ds = generate(GenerationConfig(**SMALL, p_fq=1.0))
    assert len(ds.speller_pairs) == len(ds.characters)
    for p in ds.speller_pairs:
        assert p.corrupted and ds.characters[p.x] != ds.characters[p.xu]


def test_corruption_rate_is_binomial():
    p = 0.2
    ds = generate(GenerationConfig(m_range=(30, 30), n_range=(30, 30), num_varieties=1, p_fq=p, seed=3))
    n = len(ds.speller_pairs)
    k = sum(x.corrupted for x in ds.speller_pairs)
    assert abs(k - n * p) <= 5 * math.sqrt(n * p * (1 - p))


def test_full_regular_change_is_consistent_per_initial():
    ds = generate(GenerationConfig(**SMALL, p_dia=1.0, p_char=0.0, seed=5))
    for readings in ds.varieties.values():
        for s in ds.initials:
            got = {readings[c] for c, t in ds.characters.items() if t == s}
            assert len(got) == 1 and s not in got


def test_zero_noise_copies_the_ancestor():
    ds = generate(GenerationConfig(**SMALL, p_fq=0, p_dia=0, p_char=0))
    for readings in ds.varieties.values():
        assert readings == ds.characters


def test_readings_are_sound_inventory_members():
    ds = generate(GenerationConfig(**SMALL, p_dia=0.5, p_char=0.5, seed=2))
    cand = set(change_candidates().symbols)
    inv = build_inventory()
    for readings in ds.varieties.values():
        for r in readings.values():
            assert r in cand and soundness_distance(inv.vector(r)) == 0


def test_uniform_change_redraws_differ_from_source():
    ds = generate(GenerationConfig(**SMALL, p_dia=0.0, p_char=1.0, uniform_change=True, seed=4))
    for readings in ds.varieties.values():
        assert all(readings[c] != s for c, s in ds.characters.items())


@pytest.mark.parametrize("bad", [dict(p_fq=1.5), dict(p_dia=-0.1), dict(m_range=(5, 3)), dict(n_range=(0, 2)), dict(num_varieties=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        GenerationConfig(**bad)


def test_written_dataset_ingests_back(tmp_path):
    ds = generate(GenerationConfig(**SMALL, seed=9))
    write_dataset(ds, tmp_path)
    problem = ingest(tmp_path)
    assert [e.id for e in problem.entries] == list(ds.characters)
    inv = build_inventory()
    for e in problem.entries:
        for v, vec in e.readings.items():
            assert np.array_equal(vec, inv.vector(ds.varieties[v][e.id]))
    assert [(p.x, p.xu) for p in problem.speller_pairs] == [(p.x, p.xu) for p in ds.speller_pairs]
    assert read_symbol_table(tmp_path / "ground_truth.tsv") == ds.characters
    cfg = json.loads((tmp_path / "config.json").read_text())
    assert cfg["seed"] == 9

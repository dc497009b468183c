from __future__ import annotations

import numpy as np
import pytest

from protophon.milp import Entry, ReconstructionProblem, SpellerPair
from protophon.phonology import PhonemeInventory, build_inventory


def small_instance(seed: int, n_entries: int = 3, n_phonemes: int = 8, varieties: str = "AB", p_pair: float = 0.7):
    """Random reconstruction problem over a restricted inventory, and that inventory."""
    rng = np.random.default_rng(seed)
    inv = build_inventory().without_zero()
    sub = inv.subset(sorted(rng.choice(inv.symbols, n_phonemes, replace=False)))
    entries = [
        Entry(f"e{i}", {v: sub.vector(rng.choice(sub.symbols)) for v in varieties}) for i in range(n_entries)
    ]
    pairs = [SpellerPair(f"e{i}", f"e{(i + 1) % n_entries}") for i in range(n_entries) if rng.random() < p_pair]
    return ReconstructionProblem(entries, pairs, lambda_fq=0.5), sub


@pytest.fixture(scope="session")
def inventory() -> PhonemeInventory:
    return build_inventory()


# criterion number -> (passed, detail), filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

"""Scores for reconstructions, the two majority-vote baselines and the z-test."""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .phonology import PhonemeInventory, build_inventory, soundness_distance

EQUAL_TOL = 1e-4


class IdMismatch(KeyError):
    pass


class DegeneratePool(RuntimeWarning):
    pass


Recon = Mapping[str, np.ndarray]


def _aligned(recon: Recon, truth: Recon) -> tuple[list[str], np.ndarray, np.ndarray]:
    if set(recon) != set(truth):
        missing = sorted(set(truth) ^ set(recon))
        raise IdMismatch(f"reconstruction and truth ids differ, e.g. {missing[:5]}")
    ids = sorted(truth)
    R = np.array([recon[i] for i in ids], dtype=float)
    T = np.array([truth[i] for i in ids], dtype=float)
    return ids, R, T


def l1_errors(recon: Recon, truth: Recon) -> np.ndarray:
    _, R, T = _aligned(recon, truth)
    return np.abs(R - T).sum(axis=1)


def equal_rate(recon: Recon, truth: Recon) -> float:
    err = l1_errors(recon, truth)
    return float(np.mean(err < EQUAL_TOL)) if len(err) else math.nan


def avg_l1(recon: Recon, truth: Recon) -> float:
    err = l1_errors(recon, truth)
    return float(err.mean()) if len(err) else math.nan


def sound_rate(recon: Recon) -> float:
    if not recon:
        return math.nan
    sd = soundness_distance(np.array([recon[k] for k in sorted(recon)], dtype=float))
    return float(np.mean(np.asarray(sd) < EQUAL_TOL))


def matching_rate(recon: Recon, pairs: Sequence[tuple[str, str]]) -> tuple[float, float]:
    """Share of pairs whose two reconstructions coincide (L2 < 1e-4) and the mean L2."""
    if not pairs:
        return math.nan, math.nan
    missing = sorted({i for p in pairs for i in p} - set(recon))
    if missing:
        raise IdMismatch(f"pair ids without a reconstruction, e.g. {missing[:5]}")
    d = np.array([np.linalg.norm(np.asarray(recon[a], float) - np.asarray(recon[b], float)) for a, b in pairs])
    return float(np.mean(d < EQUAL_TOL)), float(d.mean())


def _readings_by_entry(varieties: Mapping[str, Mapping[str, str]]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for v in sorted(varieties):
        for eid, sym in varieties[v].items():
            out.setdefault(eid, []).append(sym)
    return out


def majority_vote_ipa(varieties: Mapping[str, Mapping[str, str]], inventory: PhonemeInventory | None = None) -> dict[str, np.ndarray]:
    """Most frequent reading per entry; ties go to the lexicographically smallest symbol."""
    inventory = inventory or build_inventory()
    out = {}
    for eid, syms in _readings_by_entry(varieties).items():
        counts = Counter(syms)
        top = max(counts.values())
        out[eid] = inventory.vector(min(s for s, n in counts.items() if n == top))
    return out


def majority_vote_feature(varieties: Mapping[str, Mapping[str, str]], inventory: PhonemeInventory | None = None) -> dict[str, np.ndarray]:
    """Coordinate-wise mode of the readings; ties go to the smaller value."""
    inventory = inventory or build_inventory()
    out = {}
    for eid, syms in _readings_by_entry(varieties).items():
        X = np.array([inventory.vector(s) for s in syms])
        vec = np.empty(X.shape[1])
        for j in range(X.shape[1]):
            vals, counts = np.unique(X[:, j], return_counts=True)
            vec[j] = vals[np.argmax(counts)]  # unique sorts ascending, argmax takes the first
        out[eid] = vec
    return out


def two_proportion_z(sr1: float, n1: int, sr2: float, n2: int) -> float:
    """Pooled two-proportion z statistic."""
    if n1 <= 0 or n2 <= 0:
        raise ValueError("sample sizes must be positive")
    for r in (sr1, sr2):
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"rate {r} outside [0, 1]")
    p = (sr1 * n1 + sr2 * n2) / (n1 + n2)
    diff = sr1 - sr2
    if p <= 0.0 or p >= 1.0:
        warnings.warn("pooled proportion is 0 or 1; z is undefined", DegeneratePool, stacklevel=2)
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return diff / math.sqrt(p * (1 - p) * (1 / n1 + 1 / n2))


@dataclass
class EvalReport:
    n: int
    avg_l1: float = math.nan
    equal_rate: float = math.nan
    sound_rate: float = math.nan
    matching_rate: float = math.nan
    avg_l2: float = math.nan
    n_pairs: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def to_tsv(self) -> str:
        return "".join(f"{k}\t{_fmt(v)}\n" for k, v in self.as_dict().items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def evaluate(
    recon: Recon,
    truth: Recon | None = None,
    held_out: Sequence[tuple[str, str]] | None = None,
) -> EvalReport:
    rep = EvalReport(n=len(recon), sound_rate=sound_rate(recon))
    if truth is not None:
        rep.avg_l1 = avg_l1(recon, truth)
        rep.equal_rate = equal_rate(recon, truth)
    if held_out:
        rep.matching_rate, rep.avg_l2 = matching_rate(recon, held_out)
        rep.n_pairs = len(held_out)
    return rep

"""K-means over reconstructed vectors and adjusted mutual information."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Mapping

import numpy as np
from scipy.special import gammaln

from .dataset import read_tsv, write_tsv
from .evaluation import IdMismatch

SHIFT_TOL = 1e-8
MAX_ITER = 500


class TooFewPoints(ValueError):
    pass


class DegenerateLabeling(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Labeling:
    assignment: dict[str, int]

    @classmethod
    def from_labels(cls, labels: Mapping[str, Hashable]) -> "Labeling":
        """Relabel densely, numbering labels by first appearance in sorted id order."""
        dense: dict[Hashable, int] = {}
        out = {}
        for eid in sorted(labels):
            out[eid] = dense.setdefault(labels[eid], len(dense))
        return cls(out)

    @property
    def k(self) -> int:
        return len(set(self.assignment.values()))

    def to_tsv(self, path: str | Path) -> Path:
        return write_tsv(Path(path), ["entry_id", "label"], [(e, str(c)) for e, c in sorted(self.assignment.items())])

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Labeling":
        return cls.from_labels({row[0]: row[1] for _, row in read_tsv(Path(path), 2)})


# ---------------------------------------------------------------------------
# k-means

def _plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[int(rng.integers(n))]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _assign(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    lab = d2.argmin(axis=1)
    return lab, d2[np.arange(len(X)), lab]


def _lloyd(X: np.ndarray, k: int, rng: np.random.Generator) -> tuple[float, np.ndarray]:
    C = _plus_plus(X, k, rng)
    for _ in range(MAX_ITER):
        lab, d2 = _assign(X, C)
        newC = C.copy()
        for c in range(k):
            members = lab == c
            if members.any():
                newC[c] = X[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-served point
                far = int(d2.argmax())
                newC[c] = X[far]
                d2[far] = 0.0
        shift = np.abs(newC - C).max()
        C = newC
        if shift < SHIFT_TOL:
            break
    lab, d2 = _assign(X, C)
    return float(d2.sum()), lab


def kmeans(vectors: Mapping[str, np.ndarray], k: int, seed: int = 0, restarts: int = 10, workers: int = 1) -> tuple[Labeling, float]:
    """Best of ``restarts`` k-means++ / Lloyd runs by within-cluster sum of squares."""
    ids = sorted(vectors)
    X = np.array([vectors[i] for i in ids], dtype=float)
    if k < 1 or k > len(np.unique(X, axis=0)):
        raise TooFewPoints(f"k={k} but only {len(np.unique(X, axis=0))} distinct vectors")
    streams = [np.random.default_rng([seed, r]) for r in range(max(1, restarts))]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(lambda g: _lloyd(X, k, g), streams))
    else:
        runs = [_lloyd(X, k, g) for g in streams]
    # first restart wins ties, so the result does not depend on scheduling
    best = min(range(len(runs)), key=lambda r: (runs[r][0], r))
    wcss, lab = runs[best]
    return Labeling.from_labels(dict(zip(ids, lab.tolist()))), wcss


# ---------------------------------------------------------------------------
# adjusted mutual information

def contingency(u: Labeling, v: Labeling) -> np.ndarray:
    if set(u.assignment) != set(v.assignment):
        raise IdMismatch("labelings cover different entry ids")
    ids = sorted(u.assignment)
    a = np.array([u.assignment[i] for i in ids])
    b = np.array([v.assignment[i] for i in ids])
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(float)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def mutual_information(table: np.ndarray) -> float:
    N = table.sum()
    a = table.sum(axis=1, keepdims=True)
    b = table.sum(axis=0, keepdims=True)
    nz = table > 0
    nij = table[nz].astype(float)
    return float((nij / N * np.log(N * nij / (a @ b)[nz])).sum())


def expected_mutual_information(table: np.ndarray) -> float:
    """E[MI] when both marginals are held fixed and labels permuted at random."""
    N = int(table.sum())
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    lgN = gammaln(N + 1)
    total = 0.0
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - N)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=float)
            log_p = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(N - ai + 1) + gammaln(N - bj + 1)
                - lgN - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(N - ai - bj + nij + 1)
            )
            total += float((nij / N * np.log(N * nij / (ai * bj)) * np.exp(log_p)).sum())
    return total


def ami(u: Labeling, v: Labeling) -> float:
    """Adjusted mutual information with the arithmetic mean of the entropies."""
    table = contingency(u, v)
    hu, hv = entropy(table.sum(axis=1)), entropy(table.sum(axis=0))
    if hu == 0.0 or hv == 0.0:
        warnings.warn("single-cluster labeling: AMI set to 0", DegenerateLabeling, stacklevel=2)
        return 0.0
    mi = mutual_information(table)
    emi = expected_mutual_information(table)
    denom = 0.5 * (hu + hv) - emi
    if math.isclose(denom, 0.0, abs_tol=1e-15):
        # E[MI] <= MI <= min(H) forces both labelings to be the same partition
        warnings.warn("AMI denominator vanishes: identical partitions, set to 1", DegenerateLabeling, stacklevel=2)
        return 1.0
    return min(1.0, (mi - emi) / denom)

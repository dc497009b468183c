"""Lower bound on the regular-change rate from variety disagreement.

Pairwise disagreement fractions are embedded with classical MDS; the
radius of the smallest ball enclosing the embedded varieties bounds from
below how far the ancestor must be from its most distant descendant.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

JACOBI_TOL = 1e-12
TRIANGLE_SLACK = 1e-12


class EmptyIntersection(ValueError):
    pass


@dataclass(frozen=True)
class DisagreementMatrix:
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.values, dtype=float)
        n = len(self.names)
        if D.shape != (n, n):
            raise ValueError(f"matrix shape {D.shape} does not match {n} names")
        if not np.allclose(D, D.T, atol=1e-12, rtol=0):
            raise ValueError("disagreement matrix is not symmetric")
        if np.any(np.abs(np.diag(D)) > 1e-12):
            raise ValueError("disagreement matrix has a non-zero diagonal")
        if np.any(D < -1e-12) or np.any(D > 1 + 1e-12):
            raise ValueError("disagreement fractions must lie in [0, 1]")
        worst = (D[:, None, :] - D[:, :, None] - D[None, :, :]).max(initial=0.0)
        if worst > TRIANGLE_SLACK:
            raise ValueError(f"triangle inequality violated by {worst:.3g}")
        object.__setattr__(self, "values", D)

    def to_tsv(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(["", *self.names])
            for name, row in zip(self.names, self.values):
                w.writerow([name, *(repr(float(x)) for x in row)])
        return path

    @classmethod
    def from_tsv(cls, path: str | Path) -> "DisagreementMatrix":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter="\t") if r]
        names = tuple(rows[0][1:])
        return cls(names, np.array([[float(x) for x in r[1:]] for r in rows[1:]]))


def disagreement(varieties: Mapping[str, Mapping[str, object]]) -> DisagreementMatrix:
    """Share of common characters whose readings differ, for every pair of varieties."""
    names = tuple(sorted(varieties))
    if len(names) < 2:
        raise ValueError("need at least two varieties")
    shared = set.intersection(*(set(varieties[v]) for v in names))
    if not shared:
        raise EmptyIntersection("the varieties share no characters")
    chars = sorted(shared)

    def key(x):
        return tuple(np.asarray(x, dtype=float)) if not isinstance(x, str) else x

    cols = [[key(varieties[v][c]) for c in chars] for v in names]
    n = len(names)
    D = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            D[a, b] = D[b, a] = sum(x != y for x, y in zip(cols[a], cols[b])) / len(chars)
    return DisagreementMatrix(names, D)


# ---------------------------------------------------------------------------
# classical MDS

def jacobi_eigh(S: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float)
    n = len(A)
    V = np.eye(n)
    scale = max(np.abs(A).max(initial=0.0), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(max((A**2).sum() - (np.diag(A) ** 2).sum(), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass
class Embedding:
    coords: np.ndarray
    eigenvalues: np.ndarray
    distortion: float  # Frobenius norm of (embedded distances - input distances)


def mds_embed(D: DisagreementMatrix | np.ndarray) -> Embedding:
    D = np.asarray(D.values if isinstance(D, DisagreementMatrix) else D, dtype=float)
    n = len(D)
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D**2) @ J
    w, V = jacobi_eigh(B)
    keep = w > JACOBI_TOL * max(1.0, abs(w).max(initial=0.0))
    X = V[:, keep] * np.sqrt(w[keep])
    if X.shape[1] == 0:
        X = np.zeros((n, 1))
    emb = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    return Embedding(X, w, float(np.linalg.norm(emb - D)))


# ---------------------------------------------------------------------------
# smallest enclosing ball

def _circumcenter(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centre of the smallest sphere through all of ``S`` within their affine hull, with barycentric weights."""
    s0 = S[0]
    U = S[1:] - s0
    if len(U) == 0:
        return s0.copy(), np.ones(1)
    G = U @ U.T
    mu = np.linalg.lstsq(2.0 * G, np.diag(G), rcond=None)[0]
    return s0 + mu @ U, np.concatenate([[1.0 - mu.sum()], mu])


def min_enclosing_ball(points: Sequence[Sequence[float]] | np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Exact smallest enclosing ball by walking the centre toward support-set circumcentres.

    The support set stays on the boundary of the current ball; the centre
    moves toward the circumcentre of the support set, stopping when another
    point reaches the boundary.  At the circumcentre, a support point with a
    negative barycentric weight is released.  Works in any dimension.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or len(P) == 0:
        raise ValueError("need a non-empty (n, d) point array")
    scale = max(1.0, np.abs(P).max())
    c = P[0].copy()
    far = int(((P - c) ** 2).sum(axis=1).argmax())
    support = [far]
    for _ in range(20 * (len(P) + P.shape[1]) + 100):
        target, lam = _circumcenter(P[support])
        v = target - c
        if np.linalg.norm(v) <= tol * scale:
            if lam.min() >= -tol:
                break
            support.pop(int(lam.argmin()))
            continue
        s = P[support[0]]
        r2 = ((s - c) ** 2).sum()
        best_t, best_i = 1.0, None
        for i in range(len(P)):
            if i in support:
                continue
            # P[i] drifts outward only if the walk moves away from it relative to s
            denom = 2.0 * v @ (P[i] - s)
            if denom >= -tol * scale:
                continue
            t = (((P[i] - c) ** 2).sum() - r2) / denom
            t = max(t, 0.0)
            if t < best_t:
                best_t, best_i = t, i
        c = c + best_t * v
        if best_i is not None:
            support.append(best_i)
    radius = float(np.sqrt(((P - c) ** 2).sum(axis=1).max()))
    return c, radius


def pdia_lower_bound(varieties: Mapping[str, Mapping[str, object]]) -> tuple[float, Embedding, DisagreementMatrix]:
    D = disagreement(varieties)
    emb = mds_embed(D)
    _, r = min_enclosing_ball(emb.coords)
    return r, emb, D


def simplex_radius(n: int) -> float:
    """Circumradius of the regular simplex with ``n`` unit-distance vertices."""
    return math.sqrt((n - 1) / (2 * n))

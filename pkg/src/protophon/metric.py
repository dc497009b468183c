"""Feature-vector distance with dependency-aware handling of D-features.

A D-feature is compared with the base distance only when the two vectors
agree on its governing I-feature.  As the governors drift apart the
comparison is blended toward the feature's largest possible distance, so
a meaningless D-feature never looks "close" by accident.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .phonology import FeatureSchema, build_schema

BaseDistance = Callable[[np.ndarray, np.ndarray], np.ndarray]


def l1(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    return np.abs(x1 - x2)


@dataclass(frozen=True)
class MetricConfig:
    base: BaseDistance = l1
    schema: FeatureSchema = field(default_factory=build_schema)

    def sup(self, j: int) -> float:
        """Supremum of the base distance over feature ``j``'s range.

        For a base distance that grows with separation the supremum sits at
        the range endpoints.
        """
        f = self.schema.features[j]
        return float(self.base(np.float64(f.upper), np.float64(f.lower)))


DEFAULT = MetricConfig()


def dependent_distance(F1: np.ndarray, F2: np.ndarray, j: int, config: MetricConfig = DEFAULT) -> np.ndarray | float:
    """``c * s_j + (1 - c) * f(F1[j], F2[j])`` with ``c = min(f(governor), 1)``."""
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    k = config.schema.tau(j)
    c = np.minimum(config.base(F1[..., k], F2[..., k]), 1.0)
    g = c * config.sup(j) + (1.0 - c) * config.base(F1[..., j], F2[..., j])
    return float(g) if np.ndim(g) == 0 else g


def distance(F1: np.ndarray, F2: np.ndarray, config: MetricConfig = DEFAULT) -> np.ndarray | float:
    """Full distance: base distance on I-features plus dependent distance on D-features.

    Broadcasts over leading axes, so ``distance(v[None], inventory.vectors)``
    gives the distance from ``v`` to every inventory entry.
    """
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    schema = config.schema
    ii = schema.i_features
    total = config.base(F1[..., ii], F2[..., ii]).sum(axis=-1)
    for j in schema.d_features:
        total = total + dependent_distance(F1, F2, j, config)
    return float(total) if np.ndim(total) == 0 else total


def pairwise(X: np.ndarray, Y: np.ndarray | None = None, config: MetricConfig = DEFAULT) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = X if Y is None else np.asarray(Y, dtype=float)
    return distance(X[:, None, :], Y[None, :, :], config)


def random_in_range(rng: np.random.Generator, n: int, schema: FeatureSchema | None = None) -> np.ndarray:
    """Uniform samples from the feature box (not necessarily valid phonemes)."""
    schema = schema or build_schema()
    return rng.uniform(schema.lower, schema.upper, size=(n, len(schema)))

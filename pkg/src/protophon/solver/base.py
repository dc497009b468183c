from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    GAP_REACHED = "GapReached"
    TIME_LIMIT = "TimeLimit"
    INFEASIBLE = "Infeasible"


class Infeasible(RuntimeError):
    pass


class NoIncumbent(RuntimeError):
    """The search stopped at a limit before any feasible point was found."""


class ModelTooLarge(ValueError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    mip_gap: float = 1e-4
    time_limit: float = math.inf
    seed: int = 0
    feasibility_tol: float = 1e-6
    workers: int = 1
    backend: str = "bnb"  # "bnb" (built-in) or "highs"
    max_vars: int = 5000  # hard cap for the built-in solver
    node_limit: int | None = None
    presolve: bool = False  # the HiGHS build shipped with scipy 1.15 can return suboptimal points with presolve on

    def __post_init__(self):
        if self.mip_gap < 0:
            raise ValueError("mip_gap must be >= 0")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be > 0")
        if self.backend not in ("bnb", "highs"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class Solution:
    status: Status
    objective: float = math.inf
    x: np.ndarray | None = None
    bound: float = -math.inf
    nodes: int = 0
    lp_iterations: int = 0
    wall_time: float = 0.0
    # brute force only: entry -> symbol, entry -> vector
    assignment: dict[str, str] = field(default_factory=dict)
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def gap(self) -> float:
        if self.x is None:
            return math.inf
        return (self.objective - self.bound) / max(abs(self.objective), 1e-10)

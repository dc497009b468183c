"""Problem -> model -> solver -> per-entry feature vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import DEFAULT as DEFAULT_METRIC
from .metric import MetricConfig
from .milp import BigMConfig, ReconstructionProblem, build_model, exact_objective, surrogate_objective
from .solver import Solution, SolveOptions, solve

SNAP_TOL = 1e-6


@dataclass
class Reconstruction:
    vectors: dict[str, np.ndarray]
    solution: Solution
    exact_objective: float
    surrogate_objective: float

    @property
    def slack(self) -> float:
        """How far the linearised objective is from the exact one at the incumbent."""
        return abs(self.exact_objective - self.surrogate_objective)


def snap(v: np.ndarray, tol: float = SNAP_TOL) -> np.ndarray:
    """Round coordinates within ``tol`` of an integer; solver output is otherwise kept."""
    v = np.asarray(v, dtype=float)
    r = np.round(v)
    out = np.where(np.abs(v - r) <= tol, r, v)
    return out + 0.0  # drop negative zeros


def reconstruct(
    problem: ReconstructionProblem,
    solve_opts: SolveOptions | None = None,
    bigm: BigMConfig = BigMConfig(),
    metric: MetricConfig = DEFAULT_METRIC,
) -> Reconstruction:
    model = build_model(problem, bigm, metric)
    sol = solve(model, solve_opts or SolveOptions())
    vectors = {eid: snap(sol.x[idx]) for eid, idx in model.feature_vars.items()}
    return Reconstruction(
        vectors,
        sol,
        exact_objective(problem, vectors, metric),
        surrogate_objective(problem, vectors, bigm, metric),
    )

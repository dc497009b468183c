"""MILP solving: built-in branch-and-bound, HiGHS backend, LP export and a brute-force oracle."""

from __future__ import annotations

import numpy as np

from ..milp import MilpModel
from .base import Infeasible, ModelTooLarge, NoIncumbent, Solution, SolveOptions, Status, TooLarge
from .brute import brute_force_solve
from .lpfile import export_lp, parse_lp


def solve(model: MilpModel, opts: SolveOptions | None = None, start: np.ndarray | None = None) -> Solution:
    """Solve ``model``; raises :class:`Infeasible` when no feasible point exists."""
    opts = opts or SolveOptions()
    if opts.backend == "highs":
        from .highs import solve_highs

        sol = solve_highs(model, opts)
    else:
        from .bnb import solve_bnb

        sol = solve_bnb(model, opts, start=start)
    if sol.status is Status.INFEASIBLE:
        raise Infeasible("model has no feasible point")
    if sol.x is None:
        raise NoIncumbent(f"stopped ({sol.status.value}) before finding a feasible point")
    return sol


__all__ = [
    "Infeasible",
    "NoIncumbent",
    "ModelTooLarge",
    "Solution",
    "SolveOptions",
    "Status",
    "TooLarge",
    "brute_force_solve",
    "export_lp",
    "parse_lp",
    "solve",
]

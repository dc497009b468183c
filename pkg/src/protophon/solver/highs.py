"""HiGHS backend through scipy, for instances beyond the built-in solver's reach."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ..milp import MilpModel
from .base import Solution, SolveOptions, Status


def solve_highs(model: MilpModel, opts: SolveOptions) -> Solution:
    lo = np.full(model.n_rows, -np.inf)
    hi = np.full(model.n_rows, np.inf)
    le, ge, eq = model.sense == "L", model.sense == "G", model.sense == "E"
    hi[le | eq] = model.rhs[le | eq]
    lo[ge | eq] = model.rhs[ge | eq]
    options = {"mip_rel_gap": opts.mip_gap, "presolve": opts.presolve, "disp": False}
    if math.isfinite(opts.time_limit):
        options["time_limit"] = opts.time_limit
    if opts.node_limit is not None:
        options["node_limit"] = opts.node_limit
    t0 = time.perf_counter()
    res = milp(
        model.c,
        integrality=model.binary.astype(int),
        bounds=Bounds(model.lb, model.ub),
        constraints=[LinearConstraint(model.A, lo, hi)] if model.n_rows else [],
        options=options,
    )
    wall = time.perf_counter() - t0
    if res.x is None:
        if res.status == 2:
            return Solution(Status.INFEASIBLE, wall_time=wall)
        return Solution(Status.TIME_LIMIT, wall_time=wall)
    x = np.asarray(res.x, dtype=float)
    x[model.binary] = np.round(x[model.binary])
    obj = model.objective(x)
    bound = float(getattr(res, "mip_dual_bound", obj) or obj) + model.offset
    bound = min(bound, obj)
    if res.status == 0:
        gap = (obj - bound) / max(abs(obj), 1e-10)
        status = Status.OPTIMAL if gap <= opts.mip_gap + 1e-12 else Status.GAP_REACHED
    else:
        status = Status.TIME_LIMIT
    return Solution(status, obj, x, bound, nodes=int(getattr(res, "mip_node_count", 0) or 0), wall_time=wall)

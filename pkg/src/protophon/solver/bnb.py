"""Branch-and-bound over binary variables on top of the bounded simplex.

Nodes are explored depth-first until a first incumbent exists and by best
bound afterwards.  The branching variable is the most fractional binary,
lowest index on ties.  Children inherit the parent's optimal basis and are
re-optimised with the dual simplex.  A rounding heuristic (fix rounded
binaries, re-solve the LP) runs at the root and periodically.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..milp import MilpModel
from .base import ModelTooLarge, Solution, SolveOptions, Status
from .simplex import Basis, BoundedSimplex, LPResult, LPStatus

INT_TOL = 1e-6
HEURISTIC_EVERY = 50


@dataclass
class _Node:
    bound: float
    depth: int
    lb: np.ndarray
    ub: np.ndarray
    basis: Basis | None


class _Search:
    def __init__(self, model: MilpModel, opts: SolveOptions):
        self.model = model
        self.opts = opts
        self.lp = BoundedSimplex(model.A.toarray(), model.sense, model.rhs, model.c)
        self.bin_idx = np.flatnonzero(model.binary)
        self.inc_x: np.ndarray | None = None
        self.inc_obj = math.inf
        self.lp_iters = 0
        self.root_bound = -math.inf

    def lp_solve(self, lb, ub, basis) -> LPResult:
        return self.lp.solve(lb, ub, warm=basis)

    def offer(self, x: np.ndarray) -> bool:
        """Accept ``x`` as incumbent if it is feasible and better."""
        x = x.copy()
        x[self.bin_idx] = np.round(x[self.bin_idx])
        if self.model.violation(x) > self.opts.feasibility_tol:
            return False
        obj = float(self.model.c @ x)
        if obj < self.inc_obj - 1e-12:
            self.inc_obj, self.inc_x = obj, x
            return True
        return False

    def round_and_fix(self, x: np.ndarray, lb: np.ndarray, ub: np.ndarray, basis: Basis | None) -> None:
        fixed = np.round(x[self.bin_idx])
        lb2, ub2 = lb.copy(), ub.copy()
        lb2[self.bin_idx] = np.clip(fixed, lb[self.bin_idx], ub[self.bin_idx])
        ub2[self.bin_idx] = lb2[self.bin_idx]
        res = self.lp_solve(lb2, ub2, basis)
        self.lp_iters += res.iterations
        if res.status is LPStatus.OPTIMAL:
            self.offer(res.x)

    def prune_level(self) -> float:
        """Node bounds at or above this value cannot improve the incumbent enough."""
        if not math.isfinite(self.inc_obj):
            return math.inf
        # absolute slack keeps gap 0 exact up to round-off
        return self.inc_obj - max(self.opts.mip_gap * abs(self.inc_obj), 1e-9 * max(1.0, abs(self.inc_obj)))


def _fractional(x: np.ndarray, idx: np.ndarray) -> int | None:
    frac = np.abs(x[idx] - np.round(x[idx]))
    if frac.max(initial=0.0) <= INT_TOL:
        return None
    score = 0.5 - np.abs(x[idx] - np.floor(x[idx]) - 0.5)
    best = score.max()
    return int(idx[np.flatnonzero(score >= best - 1e-12)[0]])


def solve_bnb(model: MilpModel, opts: SolveOptions, start: np.ndarray | None = None) -> Solution:
    """Solve ``model`` to ``opts.mip_gap`` with the built-in branch-and-bound."""
    if model.n_vars > opts.max_vars:
        raise ModelTooLarge(f"{model.n_vars} variables exceeds the cap of {opts.max_vars}")
    t0 = time.perf_counter()
    s = _Search(model, opts)
    if start is not None:
        s.offer(np.asarray(start, dtype=float))

    root = s.lp_solve(model.lb.astype(float), model.ub.astype(float), None)
    s.lp_iters += root.iterations
    if root.status is LPStatus.INFEASIBLE:
        return Solution(Status.INFEASIBLE, lp_iterations=s.lp_iters, wall_time=time.perf_counter() - t0)
    if root.status is not LPStatus.OPTIMAL:
        raise RuntimeError(f"root relaxation ended with {root.status.value}")
    s.root_bound = root.objective
    s.round_and_fix(root.x, model.lb, model.ub, root.basis)

    counter = itertools.count()
    dive: list[_Node] = []  # depth-first stack used before the first incumbent
    heap: list[tuple[float, int, _Node]] = []
    pending = [(_Node(root.objective, 0, model.lb.astype(float), model.ub.astype(float), None), root)]
    nodes = 0
    timed_out = False
    workers = max(1, int(opts.workers))
    pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def global_bound() -> float:
        b = [n.bound for _, _, n in heap] + [n.bound for n in dive]
        return min(b) if b else math.inf

    def expand(node: _Node, res: LPResult) -> None:
        nonlocal nodes
        nodes += 1
        if res.status is not LPStatus.OPTIMAL:
            return
        if res.objective < node.bound - 1e-6 * max(1.0, abs(node.bound)):
            raise AssertionError("node relaxation fell below its parent's bound")
        if res.objective >= s.prune_level():
            return
        j = _fractional(res.x, s.bin_idx)
        if j is None:
            s.offer(res.x)
            return
        if nodes % HEURISTIC_EVERY == 0:
            s.round_and_fix(res.x, node.lb, node.ub, res.basis)
        down_ub = node.ub.copy()
        down_ub[j] = math.floor(res.x[j])
        up_lb = node.lb.copy()
        up_lb[j] = math.ceil(res.x[j])
        down = _Node(res.objective, node.depth + 1, node.lb, down_ub, res.basis)
        up = _Node(res.objective, node.depth + 1, up_lb, node.ub, res.basis)
        if s.inc_x is None:
            # dive toward the nearer integer first
            first, second = (up, down) if res.x[j] - math.floor(res.x[j]) >= 0.5 else (down, up)
            dive.extend([second, first])
        else:
            for child in (down, up):
                heapq.heappush(heap, (child.bound, next(counter), child))

    try:
        for node, res in pending:
            expand(node, res)
        while heap or dive:
            if time.perf_counter() - t0 > opts.time_limit or (opts.node_limit is not None and nodes >= opts.node_limit):
                timed_out = True
                break
            if s.inc_x is not None and dive:
                for n in dive:
                    heapq.heappush(heap, (n.bound, next(counter), n))
                dive.clear()
            lb_now = global_bound()
            if s.inc_x is not None and lb_now >= s.prune_level():
                break
            batch: list[_Node] = []
            while len(batch) < workers and (heap or dive):
                n = dive.pop() if dive else heapq.heappop(heap)[2]
                if n.bound < s.prune_level():
                    batch.append(n)
            if not batch:
                continue
            if pool is None:
                results = [s.lp_solve(n.lb, n.ub, n.basis) for n in batch]
            else:
                results = list(pool.map(lambda n: s.lp_solve(n.lb, n.ub, n.basis), batch))
            for n, res in zip(batch, results):
                s.lp_iters += res.iterations
                expand(n, res)
    finally:
        if pool is not None:
            pool.shutdown()

    wall = time.perf_counter() - t0
    if s.inc_x is None:
        if timed_out:
            return Solution(Status.TIME_LIMIT, bound=s.root_bound, nodes=nodes, lp_iterations=s.lp_iters, wall_time=wall)
        return Solution(Status.INFEASIBLE, nodes=nodes, lp_iterations=s.lp_iters, wall_time=wall)
    obj = s.inc_obj
    bound = min(obj, max(s.root_bound, global_bound() if (heap or dive) else obj))
    if s.root_bound > obj + 1e-6 * max(1.0, abs(obj)):
        raise AssertionError("incumbent below the root relaxation bound")
    gap = (obj - bound) / max(abs(obj + model.offset), 1e-10)
    if not timed_out:
        status = Status.OPTIMAL
    else:
        status = Status.GAP_REACHED if gap <= opts.mip_gap else Status.TIME_LIMIT
    return Solution(
        status,
        obj + model.offset,
        s.inc_x,
        bound + model.offset,
        nodes=nodes,
        lp_iterations=s.lp_iters,
        wall_time=wall,
    )

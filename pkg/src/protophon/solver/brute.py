"""Exhaustive search over inventory assignments: the test oracle for small instances."""

from __future__ import annotations

import itertools
import time

import numpy as np

from ..metric import DEFAULT as DEFAULT_METRIC
from ..metric import MetricConfig, pairwise
from ..milp import ReconstructionProblem, exact_objective
from ..phonology import PhonemeInventory
from .base import Solution, Status, TooLarge

MAX_ASSIGNMENTS = 10**7


def _term_lists(problem: ReconstructionProblem):
    pos = {eid: i for i, eid in enumerate(problem.ids)}
    lam = problem.lambda_fq
    pairs = []
    if lam > 0:
        pairs = [(lam * problem.pair_weight(p), pos[p.x], pos[p.xu]) for p in problem.speller_pairs]
    readings = [
        (1.0 - lam, pos[e.id], np.asarray(e.readings[v], dtype=float))
        for e in problem.entries
        for v in sorted(e.readings)
    ]
    return pairs, readings


def _costs(cands: np.ndarray, problem: ReconstructionProblem, metric: MetricConfig) -> np.ndarray:
    """Objective of every joint assignment, shape ``(len(cands),) * n_entries``."""
    n = len(problem.entries)
    V = len(cands)
    pairs, readings = _term_lists(problem)
    D = pairwise(cands, cands, metric)
    total = np.zeros((V,) * n)
    for w, a, b in pairs:
        shape = [1] * n
        if a == b:
            continue
        table = w * D
        if a < b:
            shape[a], shape[b] = V, V
            total = total + table.reshape(shape)
        else:
            shape[b], shape[a] = V, V
            total = total + table.T.reshape(shape)
    for w, a, r in readings:
        shape = [1] * n
        shape[a] = V
        total = total + (w * pairwise(cands, r[None, :], metric)[:, 0]).reshape(shape)
    return total


def brute_force_solve(
    problem: ReconstructionProblem,
    inventory: PhonemeInventory,
    metric: MetricConfig = DEFAULT_METRIC,
    blockwise: bool = False,
) -> Solution:
    """Minimise the exact objective over inventory vectors.

    With ``blockwise=True`` each feature block (an I-feature together with
    the D-features it governs) is searched independently, so a solution may
    combine blocks of different inventory phonemes.  The objective separates
    over blocks, which makes this an exhaustive search over that larger
    product set.
    """
    problem.validate()
    t0 = time.perf_counter()
    n = len(problem.entries)
    if not blockwise:
        if len(inventory) ** n > MAX_ASSIGNMENTS:
            raise TooLarge(f"{len(inventory)}^{n} assignments exceed {MAX_ASSIGNMENTS}")
        order = np.argsort(np.array(inventory.symbols, dtype=object), kind="stable")
        cands = inventory.vectors[order]
        syms = [inventory.symbols[i] for i in order]
        total = _costs(cands, problem, metric)
        # ravel order is lexicographic in (entry 0, entry 1, ...) symbol order
        flat = int(np.argmin(total.ravel()))
        choice = np.unravel_index(flat, total.shape)
        assignment = {eid: syms[k] for eid, k in zip(problem.ids, choice)}
        vectors = {eid: cands[k].copy() for eid, k in zip(problem.ids, choice)}
    else:
        schema = metric.schema
        blocks = [[k] for k in schema.i_features if k not in schema.governors]
        blocks += [[t] + [j for j in schema.d_features if schema.tau(j) == t] for t in schema.governors]
        vectors = {eid: np.zeros(len(schema)) for eid in problem.ids}
        for block in blocks:
            vals = np.unique(inventory.vectors[:, block], axis=0)
            if len(vals) ** n > MAX_ASSIGNMENTS:
                raise TooLarge(f"{len(vals)}^{n} block assignments exceed {MAX_ASSIGNMENTS}")
            cands = np.zeros((len(vals), len(schema)))
            cands[:, block] = vals
            masked = _masked(problem, block)
            total = _costs(cands, masked, metric)
            choice = np.unravel_index(int(np.argmin(total.ravel())), total.shape)
            for eid, k in zip(problem.ids, choice):
                vectors[eid][block] = vals[k]
        assignment = {eid: inventory.symbol_of(v) or "" for eid, v in vectors.items()}
    obj = exact_objective(problem, vectors, metric)
    return Solution(
        Status.OPTIMAL, obj, None, obj, wall_time=time.perf_counter() - t0,
        assignment=assignment, vectors=vectors,
    )


def _masked(problem: ReconstructionProblem, block: list[int]) -> ReconstructionProblem:
    from ..milp import Entry

    entries = []
    for e in problem.entries:
        readings = {}
        for v, r in e.readings.items():
            m = np.zeros_like(np.asarray(r, dtype=float))
            m[block] = np.asarray(r, dtype=float)[block]
            readings[v] = m
        entries.append(Entry(e.id, readings, e.medial, e.label, e.character))
    return ReconstructionProblem(entries, problem.speller_pairs, problem.lambda_fq, problem.k_medial)

"""Compare the built-in branch-and-bound with brute force and HiGHS on small instances."""

from __future__ import annotations

import argparse
import time

import numpy as np

from protophon.milp import Entry, ReconstructionProblem, SpellerPair, build_model
from protophon.phonology import build_inventory
from protophon.solver import SolveOptions, brute_force_solve, solve


def instance(seed: int, n_entries: int, n_phonemes: int, n_varieties: int):
    rng = np.random.default_rng(seed)
    inv = build_inventory().without_zero()
    sub = inv.subset(sorted(rng.choice(inv.symbols, n_phonemes, replace=False)))
    names = [f"v{i}" for i in range(n_varieties)]
    entries = [Entry(f"e{i}", {v: sub.vector(rng.choice(sub.symbols)) for v in names}) for i in range(n_entries)]
    pairs = [SpellerPair(f"e{i}", f"e{(i + 1) % n_entries}") for i in range(n_entries) if rng.random() < 0.7]
    return ReconstructionProblem(entries, pairs, lambda_fq=0.5), sub


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--entries", type=int, default=3)
    ap.add_argument("--phonemes", type=int, default=8)
    ap.add_argument("--varieties", type=int, default=2)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    print("seed\tvars\trows\tbnb\toracle\thighs\tbnb_s\tnodes")
    worst = 0.0
    for seed in range(args.instances):
        p, sub = instance(seed, args.entries, args.phonemes, args.varieties)
        model = build_model(p)
        t0 = time.perf_counter()
        ours = solve(model, SolveOptions(mip_gap=0, workers=args.workers))
        wall = time.perf_counter() - t0
        oracle = brute_force_solve(p, sub, blockwise=True).objective
        highs = solve(model, SolveOptions(mip_gap=0, backend="highs")).objective
        worst = max(worst, abs(ours.objective - oracle), abs(highs - oracle))
        print(f"{seed}\t{model.n_vars}\t{model.n_rows}\t{ours.objective:.6f}\t{oracle:.6f}\t{highs:.6f}\t{wall:.2f}\t{ours.nodes}")
    print(f"max |objective - oracle| = {worst:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

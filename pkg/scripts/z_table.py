"""Recompute pooled two-proportion z statistics for a table of sound rates.

Reads a TSV with columns sr_mip, n_mip, sr_feature_vote, n_feature_vote and,
optionally, a printed z column to compare against.
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

from protophon.evaluation import two_proportion_z

DEFAULT = Path(__file__).resolve().parents[1] / "data" / "sound_rate_comparison.tsv"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("table", nargs="?", default=str(DEFAULT))
    ap.add_argument("--tol", type=float, default=0.002)
    args = ap.parse_args(argv)
    with open(args.table, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    worst = 0.0
    print("p_dia\tp_char\tz\tprinted\tdiff")
    for r in rows:
        z = two_proportion_z(float(r["sr_mip"]), int(r["n_mip"]), float(r["sr_feature_vote"]), int(r["n_feature_vote"]))
        printed = float(r["z"]) if r.get("z") else float("nan")
        worst = max(worst, abs(z - printed))
        print(f"{r.get('p_dia', '')}\t{r.get('p_char', '')}\t{z:.4f}\t{printed:.4f}\t{z - printed:+.4f}")
    print(f"max |diff| = {worst:.5f}")
    return 0 if worst <= args.tol else 1


if __name__ == "__main__":
    raise SystemExit(main())

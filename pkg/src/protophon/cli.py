"""Command-line entry point: ``protophon <subcommand> [flags]``.

Every subcommand writes its artifacts and a ``manifest.json`` recording the
exact argument vector, package versions, output checksums and wall time.
``protophon replay MANIFEST`` re-runs a manifest; with one worker the
artifacts come out byte-identical.

Exit codes: 0 success, 2 invalid input or configuration, 3 infeasible model.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .clustering import Labeling, TooFewPoints, ami, kmeans
from .dataset import (
    DanglingSpeller,
    DuplicateEntryId,
    ParseError,
    format_symbol,
    ingest,
    read_symbol_table,
    read_tsv,
    variety_files,
    write_tsv,
)
from .evaluation import IdMismatch, evaluate, majority_vote_feature, majority_vote_ipa
from .geometry import EmptyIntersection, min_enclosing_ball, mds_embed, disagreement
from .milp import BigMConfig, EmptyProblem, InvalidWeight, ReconstructionProblem, build_model
from .phonology import UnknownSymbol, build_inventory, build_schema, nearest_phoneme, soundness_distance
from .reconstruct import reconstruct
from .solver import Infeasible, ModelTooLarge, NoIncumbent, SolveOptions, export_lp
from .synthgen import GenerationConfig, InventoryTooSmall, generate, write_dataset

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 2, 3
VALIDATION_ERRORS = (
    ParseError,
    DanglingSpeller,
    DuplicateEntryId,
    InvalidWeight,
    EmptyProblem,
    UnknownSymbol,
    IdMismatch,
    TooFewPoints,
    EmptyIntersection,
    InventoryTooSmall,
    ModelTooLarge,
    FileNotFoundError,
    ValueError,
    KeyError,
)


@dataclass
class ExperimentConfig:
    """Settings shared by the reconstruction-style subcommands."""

    data: Path
    out: Path
    lambda_fq: float = 0.5
    k_medial: float = 1.0
    solver: SolveOptions = field(default_factory=SolveOptions)
    bigm: BigMConfig = field(default_factory=BigMConfig)
    fraction: float = 0.3
    seed: int = 0
    allow_unsound: bool = False

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ValueError(f"held-out fraction must lie in [0, 1), got {self.fraction}")
        if not Path(self.data).is_dir():
            raise FileNotFoundError(f"dataset directory {self.data} does not exist")

    def problem(self) -> ReconstructionProblem:
        return ingest(self.data, self.lambda_fq, self.k_medial, self.allow_unsound)


# ---------------------------------------------------------------------------
# output helpers

def _num(x: float) -> str:
    return "nan" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_reconstruction(path: Path, vectors: dict[str, np.ndarray]) -> Path:
    names = build_schema().names
    inv = build_inventory()
    rows = []
    for eid in sorted(vectors):
        v = vectors[eid]
        sound = soundness_distance(v) < 1e-4
        rows.append([eid, format_symbol(nearest_phoneme(v, inv)), "1" if sound else "0", *(_num(x) for x in v)])
    return write_tsv(path, ["entry_id", "nearest", "sound", *names], rows)


def read_reconstruction(path: str | Path) -> dict[str, np.ndarray]:
    return {row[0]: np.array([float(x) for x in row[3:]]) for _, row in read_tsv(Path(path), 17)}


def read_truth(path: str | Path) -> dict[str, np.ndarray]:
    inv = build_inventory()
    return {eid: inv.vector(sym) for eid, sym in read_symbol_table(path).items()}


def read_varieties(data_dir: Path) -> dict[str, dict[str, str]]:
    out = {}
    for name, path in variety_files(data_dir):
        out[name] = {row[0]: ("" if row[1] == "∅" else row[1]) for _, row in read_tsv(path, 2)}
    return out


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, argv: Sequence[str], outputs: Sequence[Path], wall: float, extra: dict | None = None) -> Path:
    import scipy

    manifest = {
        "argv": list(argv),
        "versions": {
            "protophon": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": {p.name: _sha256(p) for p in sorted(outputs)},
        "wall_time_s": round(wall, 3),
    }
    manifest.update(extra or {})
    return write_json(out / "manifest.json", manifest)


def _report(rep, out: Path, stem: str = "report") -> list[Path]:
    d = rep.as_dict()
    return [
        write_tsv(out / f"{stem}.tsv", ["key", "value"], [(k, _num(v) if isinstance(v, float) else str(v)) for k, v in d.items()]),
        write_json(out / f"{stem}.json", {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}),
    ]


def _solution_summary(rec) -> dict:
    sol = rec.solution
    return {
        "status": sol.status.value,
        "objective": sol.objective,
        "bound": sol.bound,
        "gap": sol.gap,
        "exact_objective": rec.exact_objective,
        "surrogate_objective": rec.surrogate_objective,
        "nodes": sol.nodes,
    }


# ---------------------------------------------------------------------------
# subcommands

def run_synth(args) -> list[Path]:
    cfg = GenerationConfig(
        m_range=tuple(args.m_range),
        n_range=tuple(args.n_range),
        num_varieties=args.varieties,
        p_fq=args.p_fq,
        p_dia=args.p_dia,
        p_char=args.p_char,
        seed=args.seed,
        system=args.system,
        uniform_change=args.uniform_change,
    )
    return write_dataset(generate(cfg), args.out)


def _experiment(args) -> ExperimentConfig:
    return ExperimentConfig(
        data=Path(args.data),
        out=Path(args.out),
        lambda_fq=args.lambda_fq,
        k_medial=args.k_medial,
        solver=SolveOptions(
            mip_gap=args.mip_gap,
            time_limit=args.time_limit_s,
            seed=args.seed,
            workers=args.workers,
            backend=args.backend,
        ),
        bigm=BigMConfig(c_threshold=args.c_threshold),
        fraction=getattr(args, "fraction", 0.3),
        seed=args.seed,
        allow_unsound=args.allow_unsound_readings,
    )


def run_reconstruct(args) -> list[Path]:
    cfg = _experiment(args)
    problem = cfg.problem()
    rec = reconstruct(problem, cfg.solver, cfg.bigm)
    out = cfg.out
    outputs = [write_reconstruction(out / "reconstruction.tsv", rec.vectors), write_json(out / "solution.json", _solution_summary(rec))]
    truth_path = cfg.data / "ground_truth.tsv"
    truth = read_truth(truth_path) if truth_path.exists() else None
    outputs += _report(evaluate(rec.vectors, truth), out)
    return outputs


def run_eval(args) -> list[Path]:
    out = Path(args.out)
    recon = read_reconstruction(args.recon)
    truth = read_truth(args.truth) if args.truth else None
    pairs = [(r[0], r[1]) for _, r in read_tsv(Path(args.pairs), 2)] if args.pairs else None
    outputs = _report(evaluate(recon, truth, pairs), out)
    if args.data:
        varieties = read_varieties(Path(args.data))
        for name, fn in (("majority_ipa", majority_vote_ipa), ("majority_feature", majority_vote_feature)):
            base = {k: v for k, v in fn(varieties).items() if k in recon}
            outputs += _report(evaluate(base, truth, pairs), out, stem=f"report_{name}")
    return outputs


def split_pairs(problem: ReconstructionProblem, fraction: float, seed: int):
    """Uniform held-out split of the speller pairs."""
    pairs = problem.speller_pairs
    n_out = int(round(fraction * len(pairs)))
    held = set(np.random.default_rng(seed).choice(len(pairs), size=n_out, replace=False).tolist())
    train = [p for i, p in enumerate(pairs) if i not in held]
    test = [p for i, p in enumerate(pairs) if i in held]
    return train, test


def run_heldout(args) -> list[Path]:
    cfg = _experiment(args)
    problem = cfg.problem()
    train, test = split_pairs(problem, cfg.fraction, cfg.seed)
    sub = ReconstructionProblem(problem.entries, train, problem.lambda_fq, problem.k_medial)
    rec = reconstruct(sub, cfg.solver, cfg.bigm)
    out = cfg.out
    outputs = [
        write_tsv(out / "split.tsv", ["x", "x_u", "held_out"],
                  [(p.x, p.xu, "0") for p in train] + [(p.x, p.xu, "1") for p in test]),
        write_reconstruction(out / "reconstruction.tsv", rec.vectors),
        write_json(out / "solution.json", _solution_summary(rec)),
    ]
    outputs += _report(evaluate(rec.vectors, held_out=[(p.x, p.xu) for p in test]), out)
    return outputs


def _reference_labels(path: Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
    col = next((header.index(c) for c in ("label", "initial") if c in header), 1)
    return {row[0]: row[col] for _, row in read_tsv(path, col + 1) if row[col]}


@dataclass
class ClusterReport:
    k: int
    n: int
    wcss: float
    ami: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def run_cluster(args) -> list[Path]:
    out = Path(args.out)
    recon = read_reconstruction(args.recon)
    ref = _reference_labels(Path(args.reference))
    ids = sorted(set(recon) & set(ref))
    if not ids:
        raise IdMismatch("reconstruction and reference labels share no entry ids")
    ref_lab = Labeling.from_labels({i: ref[i] for i in ids})
    k = args.k or ref_lab.k
    lab, wcss = kmeans({i: recon[i] for i in ids}, k, seed=args.seed, restarts=args.restarts, workers=args.workers)
    rep = ClusterReport(k, len(ids), wcss, ami(lab, ref_lab))
    return [lab.to_tsv(out / "clusters.tsv"), *_report(rep, out)]


@dataclass
class GeometryReport:
    n_varieties: int
    radius: float
    distortion: float
    max_disagreement: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def run_geometry(args) -> list[Path]:
    out = Path(args.out)
    D = disagreement(read_varieties(Path(args.data)))
    emb = mds_embed(D)
    center, radius = min_enclosing_ball(emb.coords)
    coords = write_tsv(
        out / "coords.tsv",
        ["variety", *(f"x{i}" for i in range(emb.coords.shape[1]))],
        [(n, *(_num(x) for x in row)) for n, row in zip(D.names, emb.coords)],
    )
    rep = GeometryReport(len(D.names), radius, emb.distortion, float(D.values.max()))
    return [D.to_tsv(out / "disagreement.tsv"), coords, *_report(rep, out)]


def run_export_lp(args) -> list[Path]:
    cfg = _experiment(args)
    model = build_model(cfg.problem(), cfg.bigm)
    path = cfg.out / "model.lp"
    path.write_text(export_lp(model), encoding="utf-8")
    return [path]


# ---------------------------------------------------------------------------
# argument parsing

def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--lambda-fq", type=float, default=0.5, help="weight of speller-pair terms")
    p.add_argument("--k-medial", type=float, default=1.0, help="weight multiplier for matching-medial pairs")
    p.add_argument("--mip-gap", type=float, default=1e-4)
    p.add_argument("--time-limit-s", type=float, default=math.inf)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=("bnb", "highs"), default="highs",
                   help="built-in branch-and-bound or HiGHS (default; scales further)")
    p.add_argument("--c-threshold", type=float, default=BigMConfig().c_threshold,
                   help="governor gap at which a dependent-feature comparison becomes maximal")
    p.add_argument("--allow-unsound-readings", action="store_true",
                   help="accept readings that are not valid feature combinations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="protophon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-fq", type=float, default=0.1)
    p.add_argument("--p-dia", type=float, default=0.3)
    p.add_argument("--p-char", type=float, default=0.3)
    p.add_argument("--m-range", type=int, nargs=2, default=(35, 40), metavar=("MIN", "MAX"))
    p.add_argument("--n-range", type=int, nargs=2, default=(20, 80), metavar=("MIN", "MAX"))
    p.add_argument("--varieties", type=int, default=20)
    p.add_argument("--system", choices=("english", "german", "mandarin", "latin"), default=None)
    p.add_argument("--uniform-change", action="store_true", help="redraw changed initials uniformly")
    p.set_defaults(run=run_synth)

    p = sub.add_parser("reconstruct", help="solve the reconstruction model for a dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _solver_flags(p)
    p.set_defaults(run=run_reconstruct)

    p = sub.add_parser("eval", help="score a reconstruction")
    p.add_argument("--out", required=True)
    p.add_argument("--recon", required=True, help="reconstruction.tsv")
    p.add_argument("--truth", help="ground_truth.tsv")
    p.add_argument("--pairs", help="pairs to score with the matching rate")
    p.add_argument("--data", help="dataset directory; adds majority-vote baselines")
    p.set_defaults(run=run_eval)

    p = sub.add_parser("heldout", help="reconstruct on a pair subset and score held-out pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="split and solver seed")
    p.add_argument("--fraction", type=float, default=0.3, help="share of pairs held out")
    _solver_flags(p)
    p.set_defaults(run=run_heldout)

    p = sub.add_parser("cluster", help="k-means on a reconstruction and AMI against reference labels")
    p.add_argument("--out", required=True)
    p.add_argument("--recon", required=True)
    p.add_argument("--reference", required=True, help="TSV with entry ids and a label or initial column")
    p.add_argument("--k", type=int, default=None, help="cluster count (default: number of reference labels)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(run=run_cluster)

    p = sub.add_parser("geometry", help="enclosing-ball lower bound on the regular-change rate")
    p.add_argument("--out", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(run=run_geometry)

    p = sub.add_parser("export-lp", help="write the model in LP format")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _solver_flags(p)
    p.set_defaults(run=run_export_lp)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write to this directory instead of the recorded one")
    p.set_defaults(run=None)
    return parser


def _replace_out(argv: list[str], out: str) -> list[str]:
    argv = list(argv)
    argv[argv.index("--out") + 1] = out
    return argv


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "replay":
        recorded = json.loads(Path(args.manifest).read_text(encoding="utf-8"))["argv"]
        return main(_replace_out(recorded, args.out) if args.out else recorded)
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        outputs = args.run(args)
    except (Infeasible, NoIncumbent) as exc:
        print(f"protophon {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except VALIDATION_ERRORS as exc:
        print(f"protophon {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    write_manifest(out, argv, outputs, time.perf_counter() - t0, {"command": args.command})
    for p in outputs:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

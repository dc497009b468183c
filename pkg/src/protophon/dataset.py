"""Dataset directory layout and ingestion.

A dataset directory holds::

    entries.tsv          entry_id, character, label, medial
    pairs.tsv            x, x_u [, extra columns ignored]
    variety_<name>.tsv   entry_id, reading

Every file starts with a header row.  A missing (entry, variety) row means
the reading is absent.  The zero initial is written as ``∅``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .milp import Entry, ReconstructionProblem, SpellerPair
from .phonology import ZERO_INITIAL, UnknownSymbol, parse_phoneme, soundness_distance

ENTRY_HEADER = ["entry_id", "character", "label", "medial"]
PAIR_HEADER = ["x", "x_u"]
VARIETY_HEADER = ["entry_id", "reading"]


class ParseError(ValueError):
    def __init__(self, path: Path | str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path, self.line = str(path), line


class DanglingSpeller(ValueError):
    pass


class DuplicateEntryId(ValueError):
    pass


def format_symbol(symbol: str) -> str:
    return "∅" if symbol == ZERO_INITIAL else symbol


def write_tsv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        w.writerows(rows)
    return path


def read_tsv(path: Path, min_cols: int) -> list[tuple[int, list[str]]]:
    """Rows after the header, each with its 1-based line number."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if lineno == 1 or not row or all(not c for c in row):
                continue
            if len(row) < min_cols:
                raise ParseError(path, lineno, f"expected at least {min_cols} columns, got {len(row)}")
            out.append((lineno, row))
    return out


@dataclass
class DatasetFiles:
    entries: list[tuple[str, str, str, str]]
    pairs: list[tuple[str, ...]]
    varieties: dict[str, dict[str, str]]  # variety -> entry id -> symbol
    pairs_extra_header: list[str] = field(default_factory=list)


def write_files(files: DatasetFiles, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_tsv(out_dir / "entries.tsv", ENTRY_HEADER, files.entries),
        write_tsv(out_dir / "pairs.tsv", PAIR_HEADER + files.pairs_extra_header, files.pairs),
    ]
    for name, readings in files.varieties.items():
        rows = [(eid, format_symbol(s)) for eid, s in readings.items()]
        written.append(write_tsv(out_dir / f"variety_{name}.tsv", VARIETY_HEADER, rows))
    return written


def variety_files(data_dir: Path) -> list[tuple[str, Path]]:
    return [(p.stem[len("variety_"):], p) for p in sorted(Path(data_dir).glob("variety_*.tsv"))]


def ingest(
    data_dir: str | Path,
    lambda_fq: float = 0.5,
    k_medial: float = 1.0,
    allow_unsound: bool = False,
) -> ReconstructionProblem:
    """Parse and validate a dataset directory into a :class:`ReconstructionProblem`."""
    data_dir = Path(data_dir)
    entries: dict[str, Entry] = {}
    path = data_dir / "entries.tsv"
    for lineno, row in read_tsv(path, 1):
        eid = row[0]
        if eid in entries:
            raise DuplicateEntryId(f"{path}:{lineno}: duplicate entry id {eid!r}")
        get = lambda k: (row[k] if len(row) > k and row[k] else None)  # noqa: E731
        entries[eid] = Entry(eid, {}, medial=get(3), label=get(2), character=get(1))

    for name, vpath in variety_files(data_dir):
        for lineno, row in read_tsv(vpath, 2):
            eid, sym = row[0], row[1]
            if eid not in entries:
                raise ParseError(vpath, lineno, f"unknown entry id {eid!r}")
            if name in entries[eid].readings:
                raise ParseError(vpath, lineno, f"second reading for entry {eid!r}")
            try:
                vec = parse_phoneme(sym)
            except UnknownSymbol as exc:
                raise ParseError(vpath, lineno, f"cannot parse reading {sym!r} ({exc})") from None
            if not allow_unsound and soundness_distance(vec) > 0:
                raise ParseError(vpath, lineno, f"reading {sym!r} is not a valid feature combination")
            entries[eid].readings[name] = np.asarray(vec)

    pairs: list[SpellerPair] = []
    path = data_dir / "pairs.tsv"
    if path.exists():
        for lineno, row in read_tsv(path, 2):
            x, xu = row[0], row[1]
            for ident in (x, xu):
                if ident not in entries:
                    raise DanglingSpeller(f"{path}:{lineno}: speller id {ident!r} is not an entry")
            mx, mu = entries[x].medial, entries[xu].medial
            pairs.append(SpellerPair(x, xu, medial_match=mx is not None and mx == mu))

    problem = ReconstructionProblem(list(entries.values()), pairs, lambda_fq=lambda_fq, k_medial=k_medial)
    problem.validate()
    return problem


def read_symbol_table(path: str | Path) -> dict[str, str]:
    """Two-column ``id -> symbol`` table (ground truth, reconstructions)."""
    out = {}
    for lineno, row in read_tsv(Path(path), 2):
        try:
            parse_phoneme(row[1])
        except UnknownSymbol as exc:
            raise ParseError(path, lineno, str(exc)) from None
        out[row[0]] = ZERO_INITIAL if row[1] == "∅" else row[1]
    return out

"""Synthetic data: a ground-truth consonant system, noisy speller pairs and
descendant varieties produced by regular and irregular sound change.

Each of the three steps draws from its own child stream of the seed, so
changing e.g. ``p_fq`` leaves the sampled system and the varieties intact.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dataset import DatasetFiles, format_symbol, write_files, write_tsv
from .phonology import PhonemeInventory, build_inventory, named_system


class InventoryTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    m_range: tuple[int, int] = (35, 40)
    n_range: tuple[int, int] = (20, 80)
    num_varieties: int = 20
    p_fq: float = 0.1
    p_dia: float = 0.3
    p_char: float = 0.3
    seed: int = 0
    system: str | None = None  # None samples from the inventory; otherwise a named system
    uniform_change: bool = False

    def __post_init__(self):
        object.__setattr__(self, "m_range", tuple(int(x) for x in self.m_range))
        object.__setattr__(self, "n_range", tuple(int(x) for x in self.n_range))
        for name in ("m_range", "n_range"):
            lo, hi = getattr(self, name)
            if lo < 1 or lo > hi:
                raise ValueError(f"{name} must be a non-empty interval of positive integers, got {(lo, hi)}")
        for name in ("p_fq", "p_dia", "p_char"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.num_varieties < 1:
            raise ValueError("num_varieties must be >= 1")


@dataclass(frozen=True)
class PairRecord:
    x: str
    xu: str
    corrupted: bool


@dataclass
class SyntheticDataset:
    config: GenerationConfig
    initials: tuple[str, ...]
    characters: dict[str, str]  # character id -> ground-truth initial symbol
    speller_pairs: list[PairRecord]
    varieties: dict[str, dict[str, str]]  # variety -> character id -> reading symbol
    inventory: PhonemeInventory = field(repr=False, default_factory=build_inventory)

    def truth(self) -> dict[str, np.ndarray]:
        return {c: self.inventory.vector(s) for c, s in self.characters.items()}


def change_candidates() -> PhonemeInventory:
    """Targets of sound change: every consonant of the inventory (no zero initial)."""
    return build_inventory(with_zero=False)


def sample_system(cfg: GenerationConfig, rng: np.random.Generator) -> tuple[tuple[str, ...], dict[str, str]]:
    """Pick the initials and assign each ``n_i ~ U(n_range)`` characters."""
    if cfg.system is not None:
        initials = named_system(cfg.system)
    else:
        pool = change_candidates().symbols
        if len(pool) < cfg.m_range[1]:
            raise InventoryTooSmall(f"inventory has {len(pool)} consonants, need {cfg.m_range[1]}")
        m = int(rng.integers(cfg.m_range[0], cfg.m_range[1] + 1))
        idx = rng.choice(len(pool), size=m, replace=False)
        initials = tuple(pool[i] for i in idx)
    characters: dict[str, str] = {}
    counts = rng.integers(cfg.n_range[0], cfg.n_range[1] + 1, size=len(initials))
    for sym, n in zip(initials, counts):
        for _ in range(int(n)):
            characters[f"c{len(characters) + 1:05d}"] = sym
    return tuple(initials), characters


def derive_fanqie(characters: dict[str, str], p_fq: float, rng: np.random.Generator) -> list[PairRecord]:
    """One upper speller per character; a fraction ``p_fq`` pick a wrong initial."""
    by_initial: dict[str, list[str]] = {}
    for c, s in characters.items():
        by_initial.setdefault(s, []).append(c)
    initials = list(by_initial)
    pairs = []
    for c, s in characters.items():
        mates = [x for x in by_initial[s] if x != c]
        others = [i for i in initials if i != s]
        if rng.random() < p_fq and others:
            wrong = others[int(rng.integers(len(others)))]
            group = by_initial[wrong]
            pairs.append(PairRecord(c, group[int(rng.integers(len(group)))], True))
        elif mates:
            pairs.append(PairRecord(c, mates[int(rng.integers(len(mates)))], False))
    return pairs


def _redraw(source: str, rng: np.random.Generator, cand: PhonemeInventory, uniform: bool) -> str:
    """A different consonant, weighted by ``exp(-L1)`` to the source unless ``uniform``."""
    keep = np.array([s != source for s in cand.symbols])
    if uniform:
        w = keep.astype(float)
    else:
        src = build_inventory().vector(source)
        d = np.abs(cand.vectors - src).sum(axis=1)
        w = np.where(keep, np.exp(-d), 0.0)
    return cand.symbols[int(rng.choice(len(w), p=w / w.sum()))]


def generate_varieties(
    characters: dict[str, str], cfg: GenerationConfig, rng: np.random.Generator
) -> dict[str, dict[str, str]]:
    cand = change_candidates()
    initials = list(dict.fromkeys(characters.values()))
    width = max(2, len(str(cfg.num_varieties)))
    out: dict[str, dict[str, str]] = {}
    for v in range(1, cfg.num_varieties + 1):
        shifted = {}
        for s in initials:
            shifted[s] = _redraw(s, rng, cand, cfg.uniform_change) if rng.random() < cfg.p_dia else s
        readings = {}
        for c, s in characters.items():
            r = shifted[s]
            if rng.random() < cfg.p_char:
                r = _redraw(r, rng, cand, cfg.uniform_change)
            readings[c] = r
        out[f"v{v:0{width}d}"] = readings
    return out


def generate(cfg: GenerationConfig) -> SyntheticDataset:
    r_sys, r_fq, r_var = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(3))
    initials, characters = sample_system(cfg, r_sys)
    pairs = derive_fanqie(characters, cfg.p_fq, r_fq)
    varieties = generate_varieties(characters, cfg, r_var)
    return SyntheticDataset(cfg, initials, characters, pairs, varieties)


def write_dataset(ds: SyntheticDataset, out_dir: str | Path) -> list[Path]:
    """Write the dataset in the shared ingest layout plus ``ground_truth.tsv`` and ``config.json``."""
    files = DatasetFiles(
        entries=[(c, c, "", "") for c in ds.characters],
        pairs=[(p.x, p.xu, "1" if p.corrupted else "0") for p in ds.speller_pairs],
        varieties=ds.varieties,
        pairs_extra_header=["corrupted"],
    )
    out = Path(out_dir)
    written = write_files(files, out)
    gt = out / "ground_truth.tsv"
    write_tsv(gt, ["entry_id", "initial"], [(c, format_symbol(s)) for c, s in ds.characters.items()])
    cfg = out / "config.json"
    cfg.write_text(json.dumps(asdict(ds.config), indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return [*written, gt, cfg]

"""Distinctive-feature schema and IPA consonant inventory.

Phonemes are 14-dimensional vectors.  Eight features are independent
(I-features); six are dependent (D-features) and only carry information when
their governing I-feature takes a particular value.  A meaningless D-feature
is 0, and the all-zero vector is the zero initial (a syllable with no onset).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

# feature indices, in vector order
CONTINUANT = 0
DELAYED_RELEASE = 1
SONORITY = 2
VOICE = 3
SPREAD_GLOTTIS = 4
LABIAL = 5
LABIODENTAL = 6
CORONAL = 7
ANTERIOR = 8
DISTRIBUTED = 9
LATERAL = 10
DORSAL = 11
HIGH = 12
FRONT = 13

N_FEATURES = 14
ZERO_INITIAL = ""
DIACRITICS = ("ʷ", "ʲ", "ʰ")  # canonical suffix order

# codepoints accepted by the parser but folded onto canonical IPA ones
_ALIASES = {"g": "ɡ", "∅": ""}


class UnknownSymbol(ValueError):
    """Raised for IPA strings outside the inventory grammar."""


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "I" or "D"
    values: tuple[float, ...]  # discrete values a phoneme may take
    governor: int | None = None  # index of the governing I-feature (D only)

    @property
    def lower(self) -> float:
        return min(0.0, min(self.values))

    @property
    def upper(self) -> float:
        return max(self.values)


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]
    # D-feature index -> valid (governor value, feature value) combinations
    validity: Mapping[int, frozenset[tuple[float, float]]] = field(hash=False)

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def i_features(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == "I"]

    @property
    def d_features(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == "D"]

    def tau(self, j: int) -> int:
        gov = self.features[j].governor
        if gov is None:
            raise ValueError(f"{self.features[j].name} is not a D-feature")
        return gov

    @property
    def governors(self) -> list[int]:
        """I-features that govern at least one D-feature, in index order."""
        return sorted({self.tau(j) for j in self.d_features})

    @property
    def lower(self) -> np.ndarray:
        return np.array([f.lower for f in self.features])

    @property
    def upper(self) -> np.ndarray:
        return np.array([f.upper for f in self.features])

    def index(self, name: str) -> int:
        return self.names.index(name)

    def sup(self, j: int) -> float:
        """Largest L1 base distance attainable on feature ``j``'s range."""
        f = self.features[j]
        return f.upper - f.lower


_BINARY = (-1.0, 1.0)
_ZERO_ONE = (-1.0, 0.0, 1.0)


@lru_cache(maxsize=None)
def build_schema() -> FeatureSchema:
    feats = (
        Feature("continuant", "I", _BINARY),
        Feature("delayed release", "D", _ZERO_ONE, governor=SONORITY),
        Feature("sonority", "I", (1.0, 2.0, 3.0, 4.0, 5.0)),
        Feature("voice", "I", _BINARY),
        Feature("spread glottis", "I", _BINARY),
        Feature("labial", "I", _BINARY),
        Feature("labiodental", "D", _ZERO_ONE, governor=LABIAL),
        Feature("coronal", "I", _BINARY),
        Feature("anterior", "D", _ZERO_ONE, governor=CORONAL),
        Feature("distributed", "D", _ZERO_ONE, governor=CORONAL),
        Feature("lateral", "I", _BINARY),
        Feature("dorsal", "I", _BINARY),
        Feature("high", "D", (0.0, 1.0, 2.0, 3.0), governor=DORSAL),
        Feature("front", "D", (0.0, 1.0, 2.0, 3.0), governor=DORSAL),
    )
    sonority_dr = frozenset(
        {(1.0, 1.0), (1.0, -1.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0), (5.0, 0.0), (0.0, 0.0)}
    )
    plus_minus = frozenset({(1.0, 1.0), (1.0, -1.0), (-1.0, 0.0), (0.0, 0.0)})
    graded = frozenset({(-1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (0.0, 0.0)})
    validity = {
        DELAYED_RELEASE: sonority_dr,
        LABIODENTAL: plus_minus,
        ANTERIOR: plus_minus,
        DISTRIBUTED: plus_minus,
        HIGH: graded,
        FRONT: graded,
    }
    return FeatureSchema(feats, validity)


def in_range(v: np.ndarray, schema: FeatureSchema | None = None, tol: float = 1e-9) -> bool:
    schema = schema or build_schema()
    v = np.asarray(v, dtype=float)
    return bool(np.all(v >= schema.lower - tol) and np.all(v <= schema.upper + tol))


def soundness_rows(v: np.ndarray, schema: FeatureSchema | None = None) -> np.ndarray:
    """Per-D-feature shortest L1 distance to a valid (governor, feature) pair.

    ``v`` may be a single vector or a stack of shape ``(..., 14)``; the result
    has a trailing axis of length 6 in D-feature order.
    """
    schema = schema or build_schema()
    v = np.asarray(v, dtype=float)
    rows = []
    for j in schema.d_features:
        combos = np.array(sorted(schema.validity[j]))
        gov = v[..., schema.tau(j), None]
        val = v[..., j, None]
        dist = np.abs(gov - combos[:, 0]) + np.abs(val - combos[:, 1])
        rows.append(dist.min(axis=-1))
    return np.stack(rows, axis=-1)


def soundness_distance(v: np.ndarray, schema: FeatureSchema | None = None) -> float | np.ndarray:
    """Total distance from ``v`` to the nearest valid combination, summed over D-features."""
    total = soundness_rows(v, schema).sum(axis=-1)
    return float(total) if np.ndim(total) == 0 else total


# ---------------------------------------------------------------------------
# inventory

# (continuant, delayed release, sonority)
_MANNERS = {
    "stop": (-1, -1, 1),
    "affricate": (-1, 1, 1),
    "fricative": (1, 1, 1),
    "nasal": (-1, 0, 2),
    "liquid": (1, 0, 3),
    "glide": (1, 0, 4),
}

# (labial, labiodental, coronal, anterior, distributed, dorsal, high, front)
_PLACES = {
    "bilabial": (1, -1, -1, 0, 0, -1, 0, 0),
    "labiodental": (1, 1, -1, 0, 0, -1, 0, 0),
    "dental": (-1, 0, 1, 1, 1, -1, 0, 0),
    "alveolar": (-1, 0, 1, 1, -1, -1, 0, 0),
    "postalveolar": (-1, 0, 1, -1, 1, -1, 0, 0),
    "retroflex": (-1, 0, 1, -1, -1, -1, 0, 0),
    "alveolopalatal": (-1, 0, 1, -1, 1, 1, 3, 3),
    "palatal": (-1, 0, -1, 0, 0, 1, 3, 3),
    "velar": (-1, 0, -1, 0, 0, 1, 3, 2),
    "uvular": (-1, 0, -1, 0, 0, 1, 2, 1),
    "pharyngeal": (-1, 0, -1, 0, 0, 1, 1, 1),
    "glottal": (-1, 0, -1, 0, 0, -1, 0, 0),
    "labiovelar": (1, -1, -1, 0, 0, 1, 3, 2),
    "labiopalatal": (1, -1, -1, 0, 0, 1, 3, 3),
}


def _base_vector(manner: str, place: str, voice: int, lateral: int) -> np.ndarray:
    cont, dr, son = _MANNERS[manner]
    lab, ld, cor, ant, dist, dors, high, front = _PLACES[place]
    # [h] and breathy [ɦ] are the only plain consonants with spread glottis
    sg = 1 if (place == "glottal" and manner == "fricative") else -1
    return np.array(
        [cont, dr, son, voice, sg, lab, ld, cor, ant, dist, lateral, dors, high, front],
        dtype=float,
    )


@lru_cache(maxsize=None)
def _base_table() -> dict[str, tuple[float, ...]]:
    text = resources.files("protophon").joinpath("data/consonants.tsv").read_text(encoding="utf-8")
    table = {}
    for row in csv.DictReader(io.StringIO(text), delimiter="\t"):
        vec = _base_vector(row["manner"], row["place"], int(row["voice"]), int(row["lateral"]))
        table[row["symbol"]] = tuple(vec)
    return table


def _apply_diacritic(vec: np.ndarray, mark: str) -> np.ndarray:
    out = vec.copy()
    if mark == "ʰ":
        if out[SPREAD_GLOTTIS] == 1:
            raise UnknownSymbol("aspiration on a [+spread glottis] consonant")
        out[SPREAD_GLOTTIS] = 1
    elif mark == "ʷ":
        if out[LABIAL] == 1:
            raise UnknownSymbol("labialisation on a labial consonant")
        out[LABIAL], out[LABIODENTAL] = 1, -1
    elif mark == "ʲ":
        if out[DORSAL] == 1:
            raise UnknownSymbol("palatalisation on a dorsal consonant")
        out[DORSAL], out[HIGH], out[FRONT] = 1, 3, 3
    else:
        raise UnknownSymbol(f"unsupported diacritic {mark!r}")
    return out


def parse_phoneme(symbol: str, schema: FeatureSchema | None = None) -> np.ndarray:
    """Feature vector of an IPA initial: base consonant plus ʷ ʲ ʰ suffixes.

    The empty string is the zero initial.

    >>> parse_phoneme("m")[[SONORITY, VOICE, LABIAL]]
    array([2., 1., 1.])
    """
    del schema  # one schema; argument kept for call-site symmetry
    sym = "".join(_ALIASES.get(ch, ch) for ch in symbol)
    if sym == ZERO_INITIAL:
        return np.zeros(N_FEATURES)
    table = _base_table()
    base = next((sym[:n] for n in (2, 1) if sym[:n] in table), None)
    if base is None:
        raise UnknownSymbol(f"unknown IPA consonant in {symbol!r}")
    marks = sym[len(base):]
    if len(set(marks)) != len(marks):
        raise UnknownSymbol(f"repeated diacritic in {symbol!r}")
    vec = np.array(table[base])
    for mark in marks:
        try:
            vec = _apply_diacritic(vec, mark)
        except UnknownSymbol as exc:
            raise UnknownSymbol(f"{symbol!r}: {exc}") from None
    return vec


class PhonemeInventory:
    """Immutable mapping from IPA symbols to distinct feature vectors."""

    def __init__(self, symbols: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=float).reshape(len(symbols), N_FEATURES)
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate symbols in inventory")
        if len({tuple(v) for v in vectors}) != len(symbols):
            raise ValueError("two inventory symbols share a feature vector")
        self._symbols = tuple(symbols)
        self._vectors = vectors
        self._vectors.setflags(write=False)
        self._index = {s: i for i, s in enumerate(self._symbols)}
        self._by_vector = {tuple(v): s for s, v in zip(self._symbols, vectors)}

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> "PhonemeInventory":
        symbols = list(symbols)
        return cls(symbols, np.array([parse_phoneme(s) for s in symbols]).reshape(-1, N_FEATURES))

    @property
    def symbols(self) -> tuple[str, ...]:
        return self._symbols

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    def __len__(self) -> int:
        return len(self._symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def __iter__(self):
        return iter(self._symbols)

    def vector(self, symbol: str) -> np.ndarray:
        return self._vectors[self._index[symbol]]

    def symbol_of(self, vec: np.ndarray) -> str | None:
        """Exact reverse lookup; ``None`` if the vector is not an inventory entry."""
        return self._by_vector.get(tuple(np.asarray(vec, dtype=float)))

    def subset(self, symbols: Iterable[str]) -> "PhonemeInventory":
        symbols = list(symbols)
        return PhonemeInventory(symbols, np.array([self.vector(s) for s in symbols]).reshape(-1, N_FEATURES))

    def without_zero(self) -> "PhonemeInventory":
        return self.subset([s for s in self._symbols if s != ZERO_INITIAL])

    def to_tsv(self, schema: FeatureSchema | None = None) -> str:
        schema = schema or build_schema()
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["symbol", *schema.names])
        for s, v in zip(self._symbols, self._vectors):
            w.writerow([s, *(_fmt(x) for x in v)])
        return buf.getvalue()

    @classmethod
    def from_tsv(cls, text: str) -> "PhonemeInventory":
        rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
        header, body = rows[0], rows[1:]
        if len(header) != N_FEATURES + 1:
            raise ValueError(f"expected {N_FEATURES + 1} columns, got {len(header)}")
        symbols = [r[0] for r in body]
        vectors = np.array([[float(x) for x in r[1:]] for r in body]).reshape(-1, N_FEATURES)
        return cls(symbols, vectors)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@lru_cache(maxsize=None)
def build_inventory(with_zero: bool = True) -> PhonemeInventory:
    """Pulmonic consonants plus every non-redundant ʷ/ʲ/ʰ combination.

    A diacritic combination whose vector coincides with an earlier entry
    (e.g. [ʃʲ] = [ɕ]) is left out, so symbols and vectors are in bijection.
    """
    symbols: list[str] = []
    seen: set[tuple[float, ...]] = set()
    if with_zero:
        symbols.append(ZERO_INITIAL)
        seen.add((0.0,) * N_FEATURES)
    bases = list(_base_table())
    for n_marks in range(len(DIACRITICS) + 1):
        for base in bases:
            for marks in itertools.combinations(DIACRITICS, n_marks):
                sym = base + "".join(marks)
                try:
                    vec = tuple(parse_phoneme(sym))
                except UnknownSymbol:
                    continue
                if vec not in seen:
                    seen.add(vec)
                    symbols.append(sym)
    return PhonemeInventory.from_symbols(symbols)


def nearest_phoneme(v: np.ndarray, inventory: PhonemeInventory | None = None) -> str:
    """Inventory symbol closest to ``v`` under the feature distance; ties go to the smaller symbol."""
    from .metric import distance

    inventory = inventory if inventory is not None else build_inventory()
    if len(inventory) == 0:
        raise ValueError("empty inventory")
    d = distance(np.asarray(v, dtype=float)[None, :], inventory.vectors)
    best = d.min()
    return min(s for s, x in zip(inventory.symbols, d) if x <= best + 1e-12)


@lru_cache(maxsize=None)
def named_system(name: str) -> tuple[str, ...]:
    """Consonant table of a natural system (english, german, mandarin, latin)."""
    text = resources.files("protophon").joinpath("data/systems.json").read_text(encoding="utf-8")
    systems = json.loads(text)
    if name not in systems:
        raise KeyError(f"unknown system {name!r}; choose from {sorted(systems)}")
    return tuple(systems[name])


def load_inventory(path: str | Path) -> PhonemeInventory:
    return PhonemeInventory.from_tsv(Path(path).read_text(encoding="utf-8"))

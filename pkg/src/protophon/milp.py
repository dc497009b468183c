"""Mixed-integer linear model for reconstructing ancestral initials.

Each entry gets 14 continuous feature variables.  The objective trades off
distance between speller-linked entries against distance to the attested
readings in each variety.  Absolute values are linearised with epigraph
variables; the dependent-feature blend ``c * s_j + (1 - c) * f`` is replaced
by an indicator ``chat`` that switches on when the governing I-features differ
by more than ``c_threshold``, giving ``max(|dF_j|, s_j * chat)``.
Consistency between D-features and their governors uses big-M indicator
constraints.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import phonology as ph
from .metric import DEFAULT as DEFAULT_METRIC
from .metric import MetricConfig, distance
from .phonology import FeatureSchema, build_schema


class EmptyProblem(ValueError):
    pass


class InvalidWeight(ValueError):
    pass


@dataclass
class Entry:
    id: str
    readings: dict[str, np.ndarray] = field(default_factory=dict)  # variety -> vector
    medial: str | None = None
    label: str | None = None
    character: str | None = None


@dataclass(frozen=True)
class SpellerPair:
    x: str
    xu: str
    medial_match: bool = False


@dataclass
class ReconstructionProblem:
    entries: list[Entry]
    speller_pairs: list[SpellerPair] = field(default_factory=list)
    lambda_fq: float = 0.5
    k_medial: float = 1.0

    def __post_init__(self):
        self._by_id = {e.id: e for e in self.entries}

    def entry(self, eid: str) -> Entry:
        return self._by_id[eid]

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    @property
    def varieties(self) -> list[str]:
        return sorted({v for e in self.entries for v in e.readings})

    def validate(self) -> None:
        if len(self._by_id) != len(self.entries):
            raise ValueError("duplicate entry ids")
        # lambda_fq = 0 is accepted and simply drops the speller terms
        if not 0.0 <= self.lambda_fq < 1.0:
            raise InvalidWeight(f"lambda_fq must lie in [0, 1), got {self.lambda_fq}")
        if self.k_medial < 1.0:
            raise InvalidWeight(f"k_medial must be >= 1, got {self.k_medial}")
        for p in self.speller_pairs:
            for eid in (p.x, p.xu):
                if eid not in self._by_id:
                    raise KeyError(f"speller pair refers to unknown entry {eid!r}")
        if not self.entries or not (self.speller_pairs or any(e.readings for e in self.entries)):
            raise EmptyProblem("no entry has a reading or a speller pair")

    def pair_weight(self, pair: SpellerPair) -> float:
        return self.k_medial if pair.medial_match else 1.0


@dataclass(frozen=True)
class BigMConfig:
    big_m: float = 10.0
    eps: float = 1e-3
    # governor gap above which a D-feature comparison counts as maximal
    c_threshold: float = 0.1
    # shrink each big-M coefficient to the smallest value valid under the variable bounds
    tighten: bool = True
    # lower-bound the dependent distance below the threshold as well
    envelope: bool = True


@dataclass
class MilpModel:
    """Minimise ``c @ x + offset`` subject to ``A x (sense) rhs`` and bounds.

    ``sense`` holds ``"L"`` (<=), ``"G"`` (>=) or ``"E"`` (=) per row.
    """

    names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    row_names: list[str]
    offset: float = 0.0
    feature_vars: dict[str, np.ndarray] = field(default_factory=dict)
    roles: dict[str, list[int]] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    @property
    def n_binary(self) -> int:
        return int(self.binary.sum())

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x + self.offset)

    def violation(self, x: np.ndarray) -> float:
        """Largest bound, row or integrality violation of ``x``."""
        x = np.asarray(x, dtype=float)
        ax = self.A @ x
        viol = np.zeros(self.n_rows)
        le, ge, eq = self.sense == "L", self.sense == "G", self.sense == "E"
        viol[le] = ax[le] - self.rhs[le]
        viol[ge] = self.rhs[ge] - ax[ge]
        viol[eq] = np.abs(ax[eq] - self.rhs[eq])
        worst = max(viol.max(initial=0.0), (self.lb - x).max(initial=0.0), (x - self.ub).max(initial=0.0))
        if self.binary.any():
            xb = x[self.binary]
            worst = max(worst, np.abs(xb - np.round(xb)).max())
        return float(worst)

    def extract(self, x: np.ndarray) -> dict[str, np.ndarray]:
        """Feature vectors per entry from a model solution."""
        return {eid: np.asarray(x)[idx].copy() for eid, idx in self.feature_vars.items()}


class _Builder:
    def __init__(self):
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.binary: list[bool] = []
        self.c: list[float] = []
        self.rows: list[tuple[list[int], list[float]]] = []
        self.sense: list[str] = []
        self.rhs: list[float] = []
        self.row_names: list[str] = []
        self.roles: dict[str, list[int]] = defaultdict(list)

    def var(self, name: str, lb: float, ub: float, *, binary: bool = False, cost: float = 0.0, role: str = "") -> int:
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.binary.append(binary)
        self.c.append(float(cost))
        idx = len(self.names) - 1
        if role:
            self.roles[role].append(idx)
        return idx

    def row(self, terms: Mapping[int, float], sense: str, rhs: float, name: str) -> None:
        cols = [k for k, v in terms.items() if v != 0.0]
        self.rows.append((cols, [float(terms[k]) for k in cols]))
        self.sense.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name)

    def span(self, terms: Mapping[int, float], const: float = 0.0) -> tuple[float, float]:
        """Range of ``sum(coef * var) + const`` over the variable bounds."""
        lo = hi = const
        for k, a in terms.items():
            lo += a * (self.lb[k] if a > 0 else self.ub[k])
            hi += a * (self.ub[k] if a > 0 else self.lb[k])
        return lo, hi

    def build(self) -> MilpModel:
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for cols, vals in self.rows:
            indices.extend(cols)
            data.extend(vals)
            indptr.append(len(indices))
        A = sp.csr_matrix((data, indices, indptr), shape=(len(self.rows), len(self.names)))
        return MilpModel(
            names=self.names,
            lb=np.array(self.lb),
            ub=np.array(self.ub),
            binary=np.array(self.binary, dtype=bool),
            c=np.array(self.c),
            A=A,
            sense=np.array(self.sense, dtype="<U1"),
            rhs=np.array(self.rhs),
            row_names=self.row_names,
            roles=dict(self.roles),
        )


def _lin(a: Mapping[int, float], b: Mapping[int, float], scale: float = 1.0) -> dict[int, float]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + scale * v
    return out


def _entry_constraints(bld: _Builder, eid: str, F: np.ndarray, schema: FeatureSchema, opts: BigMConfig) -> None:
    M, eps = opts.big_m, opts.eps

    def big(terms, rhs):
        """Coefficient making ``terms <= rhs + M`` vacuous under the bounds."""
        if not opts.tighten:
            return M
        return max(bld.span(terms)[1] - rhs, 0.0)

    # delayed release: |dr| <= max(0, min(son, 2 - son)) via one indicator
    dr, son = F[ph.DELAYED_RELEASE], F[ph.SONORITY]
    w = bld.var(f"w_dr[{eid}]", 0, 1, binary=True, role="indicator")
    for sgn, tag in ((1.0, "+"), (-1.0, "-")):
        t1 = {dr: sgn, son: -1.0}
        m1 = big(t1, 0.0)
        bld.row(_lin(t1, {w: m1}), "L", m1, f"dr_le_son{tag}[{eid}]")
        t2 = {dr: sgn, son: 1.0}
        m2 = big(t2, 2.0)
        bld.row(_lin(t2, {w: m2}), "L", 2.0 + m2, f"dr_le_2-son{tag}[{eid}]")
        m3 = big({dr: sgn}, 0.0)
        bld.row({dr: sgn, w: -m3}, "L", 0.0, f"dr_off{tag}[{eid}]")

    # governor indicators b = [F_tau > 0.5]
    gov_b: dict[int, int] = {}
    for tau in (ph.LABIAL, ph.CORONAL, ph.DORSAL):
        f = F[tau]
        b = bld.var(f"b_{schema.features[tau].name}[{eid}]", 0, 1, binary=True, role="indicator")
        gov_b[tau] = b
        lo = 0.5 + eps
        ma = max(lo - bld.lb[f], 0.0) if opts.tighten else M
        bld.row({f: 1.0, b: -ma}, "G", lo - ma, f"gov_on[{eid},{tau}]")
        mb = max(bld.ub[f] - 0.5, 0.0) if opts.tighten else M
        bld.row({f: 1.0, b: -mb}, "L", 0.5, f"gov_off[{eid},{tau}]")

    # high / front: b = 1 -> F >= 1, b = 0 -> F = 0
    for j in (ph.HIGH, ph.FRONT):
        b = gov_b[ph.DORSAL]
        bld.row({F[j]: 1.0, b: -1.0}, "G", 0.0, f"graded_on[{eid},{j}]")
        mu = bld.ub[F[j]] if opts.tighten else M
        bld.row({F[j]: 1.0, b: -mu}, "L", 0.0, f"graded_off[{eid},{j}]")

    # other D-features: |F| = b via F = b+ - b-, b+ + b- = b
    for j in (ph.LABIODENTAL, ph.ANTERIOR, ph.DISTRIBUTED):
        b = gov_b[schema.tau(j)]
        bp = bld.var(f"bp_{j}[{eid}]", 0, 1, binary=True, role="indicator")
        bm = bld.var(f"bm_{j}[{eid}]", 0, 1, binary=True, role="indicator")
        bld.row({F[j]: 1.0, bp: -1.0, bm: 1.0}, "E", 0.0, f"sign[{eid},{j}]")
        bld.row({bp: 1.0, bm: 1.0, b: -1.0}, "E", 0.0, f"abs[{eid},{j}]")


def _distance_term(
    bld: _Builder,
    tag: str,
    F: np.ndarray,
    other: np.ndarray,
    other_is_const: bool,
    weight: float,
    schema: FeatureSchema,
    metric: MetricConfig,
    opts: BigMConfig,
) -> None:
    """Add surrogate distance d_hat(F, other) to the objective with ``weight``."""

    def delta(k: int) -> tuple[dict[int, float], float]:
        if other_is_const:
            return {int(F[k]): 1.0}, -float(other[k])
        return {int(F[k]): 1.0, int(other[k]): -1.0}, 0.0

    t_vars: dict[int, int] = {}
    for k in schema.i_features:
        terms, const = delta(k)
        lo, hi = bld.span(terms, const)
        t = bld.var(f"t[{tag},{k}]", 0.0, max(hi, -lo), cost=weight, role="distance")
        t_vars[k] = t
        bld.row(_lin({t: 1.0}, terms, -1.0), "G", const, f"abs+[{tag},{k}]")
        bld.row(_lin({t: 1.0}, terms, 1.0), "G", -const, f"abs-[{tag},{k}]")

    chat: dict[int, int] = {}
    theta = opts.c_threshold
    for tau in schema.governors:
        terms, const = delta(tau)
        lo, hi = bld.span(terms, const)
        reach = max(hi, -lo)
        if reach <= theta:
            continue  # governors can never differ enough
        ch = bld.var(f"chat[{tag},{tau}]", 0, 1, binary=True, role="indicator")
        chat[tau] = ch
        m = (reach - theta) if opts.tighten else opts.big_m
        # |delta| <= theta + m * chat
        bld.row(_lin({ch: -m}, terms, 1.0), "L", theta - const, f"gap+[{tag},{tau}]")
        bld.row(_lin({ch: -m}, terms, -1.0), "L", theta + const, f"gap-[{tag},{tau}]")

    for j in schema.d_features:
        terms, const = delta(j)
        lo, hi = bld.span(terms, const)
        s_j = metric.sup(j)
        g = bld.var(f"g[{tag},{j}]", 0.0, max(s_j, hi, -lo), cost=weight, role="distance")
        bld.row(_lin({g: 1.0}, terms, -1.0), "G", const, f"abs+[{tag},{j}]")
        bld.row(_lin({g: 1.0}, terms, 1.0), "G", -const, f"abs-[{tag},{j}]")
        tau = schema.tau(j)
        ch = chat.get(tau)
        if ch is not None:
            bld.row({g: 1.0, ch: -s_j}, "G", 0.0, f"blend[{tag},{j}]")
            if opts.envelope:
                # below the threshold c = |dF_tau| <= theta, and c*s + (1-c)*|dF_j|
                # is bounded below by s*|dF_tau| + (1-theta)*|dF_j|
                t_tau = t_vars[tau]
                reach_j = max(hi, -lo)
                m = s_j * bld.ub[t_tau] + (1.0 - theta) * reach_j if opts.tighten else opts.big_m * s_j
                for sgn, side in ((1.0, "+"), (-1.0, "-")):
                    row = _lin({g: 1.0, t_tau: -s_j, ch: m}, terms, -sgn * (1.0 - theta))
                    bld.row(row, "G", sgn * (1.0 - theta) * const, f"env{side}[{tag},{j}]")


def build_model(
    problem: ReconstructionProblem,
    opts: BigMConfig = BigMConfig(),
    metric: MetricConfig = DEFAULT_METRIC,
) -> MilpModel:
    problem.validate()
    schema = metric.schema
    lower, upper = schema.lower, schema.upper
    bld = _Builder()

    feature_vars: dict[str, np.ndarray] = {}
    for e in problem.entries:
        idx = [
            bld.var(f"F[{e.id},{j}]", lower[j], upper[j], role="feature")
            for j in range(len(schema))
        ]
        feature_vars[e.id] = np.array(idx)
        _entry_constraints(bld, e.id, feature_vars[e.id], schema, opts)

    lam = problem.lambda_fq
    if lam > 0.0:
        for n, pair in enumerate(problem.speller_pairs):
            if pair.x == pair.xu:
                continue
            w = lam * problem.pair_weight(pair)
            _distance_term(bld, f"fq{n}", feature_vars[pair.x], feature_vars[pair.xu], False, w, schema, metric, opts)

    for e in problem.entries:
        # identical readings collapse into one term with a multiplied weight
        groups: dict[tuple[float, ...], int] = defaultdict(int)
        for v in sorted(e.readings):
            groups[tuple(np.asarray(e.readings[v], dtype=float))] += 1
        for n, (vec, count) in enumerate(groups.items()):
            _distance_term(
                bld, f"{e.id}~{n}", feature_vars[e.id], np.array(vec), True,
                (1.0 - lam) * count, schema, metric, opts,
            )

    model = bld.build()
    model.feature_vars = feature_vars
    return model


# ---------------------------------------------------------------------------
# objective evaluation outside the model

def _terms(problem: ReconstructionProblem):
    lam = problem.lambda_fq
    if lam > 0.0:
        for pair in problem.speller_pairs:
            yield lam * problem.pair_weight(pair), pair.x, pair.xu, None
    for e in problem.entries:
        for v in sorted(e.readings):
            yield 1.0 - lam, e.id, None, np.asarray(e.readings[v], dtype=float)


def exact_objective(
    problem: ReconstructionProblem,
    recon: Mapping[str, np.ndarray],
    metric: MetricConfig = DEFAULT_METRIC,
) -> float:
    """Weighted objective evaluated with the exact feature distance."""
    total = 0.0
    for w, a, b, const in _terms(problem):
        other = recon[b] if const is None else const
        total += w * distance(recon[a], other, metric)
    return total


def surrogate_distance(
    F1: np.ndarray, F2: np.ndarray, opts: BigMConfig = BigMConfig(), metric: MetricConfig = DEFAULT_METRIC
) -> float:
    """The linearised distance the model optimises, at its cheapest indicator setting."""
    schema = metric.schema
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    total = float(np.abs(F1[schema.i_features] - F2[schema.i_features]).sum())
    for j in schema.d_features:
        k = schema.tau(j)
        dk = abs(F1[k] - F2[k])
        dj = abs(F1[j] - F2[j])
        if dk > opts.c_threshold + 1e-9:
            total += max(dj, metric.sup(j))
        elif opts.envelope:
            total += max(dj, metric.sup(j) * dk + (1.0 - opts.c_threshold) * dj)
        else:
            total += dj
    return total


def surrogate_objective(
    problem: ReconstructionProblem,
    recon: Mapping[str, np.ndarray],
    opts: BigMConfig = BigMConfig(),
    metric: MetricConfig = DEFAULT_METRIC,
) -> float:
    total = 0.0
    for w, a, b, const in _terms(problem):
        other = recon[b] if const is None else const
        total += w * surrogate_distance(recon[a], other, opts, metric)
    return total


def complete_assignment(model: MilpModel, recon: Mapping[str, np.ndarray]) -> np.ndarray:
    """Extend per-entry feature vectors to a full model point.

    Indicators and distance variables get their cheapest feasible values;
    the result is feasible whenever every vector is a valid phoneme encoding.
    """
    x = np.zeros(model.n_vars)
    for eid, idx in model.feature_vars.items():
        x[idx] = recon[eid]
    feat = {n: i for i, n in enumerate(model.names) if n.startswith("F[")}

    def f(eid: str, j: int) -> float:
        return x[feat[f"F[{eid},{j}]"]]

    term_vars = []
    for i, name in enumerate(model.names):
        kind, _, eid = name.partition("[")
        eid = eid[:-1]
        if kind == "w_dr":
            son = f(eid, ph.SONORITY)
            x[i] = float(min(son, 2.0 - son) > 0)
        elif kind.startswith("b_"):
            tau = {"labial": ph.LABIAL, "coronal": ph.CORONAL, "dorsal": ph.DORSAL}[kind[2:]]
            x[i] = float(f(eid, tau) > 0.5)
        elif kind.startswith("bp_"):
            x[i] = float(f(eid, int(kind[3:])) > 0.5)
        elif kind.startswith("bm_"):
            x[i] = float(f(eid, int(kind[3:])) < -0.5)
        elif kind in ("chat", "t", "g"):
            term_vars.append(i)

    # each indicator / epigraph variable is the smallest value its rows allow;
    # indicators come first because the blend rows read them
    A = model.A.tocsc()
    rows_of = {i: A[:, i].nonzero()[0] for i in term_vars}
    term_vars.sort(key=lambda i: not model.names[i].startswith("chat["))
    for i in term_vars:
        x[i] = 0.0
        need = model.lb[i]
        is_chat = model.names[i].startswith("chat[")
        for r in rows_of[i]:
            if is_chat and not model.row_names[r].startswith("gap"):
                continue  # the other rows mentioning chat only get looser as it grows
            coef = A[r, i]
            rest = float((model.A[r] @ x)[0])
            if model.sense[r] == "G" and coef > 0:
                need = max(need, (model.rhs[r] - rest) / coef)
            elif model.sense[r] == "L" and coef < 0:
                need = max(need, (rest - model.rhs[r]) / -coef)
        x[i] = float(np.ceil(need - 1e-9)) if model.binary[i] else need
    return x

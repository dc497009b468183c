"""CPLEX-style LP text export and a parser for the subset it writes."""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..milp import MilpModel

_ALLOWED = set(string.ascii_letters + string.digits + "!\"#$%&()/,.;?@_`'{}|~")
_LINE = 200
_SENSE = {"L": "<=", "G": ">=", "E": "="}


def lp_names(names: list[str], prefix: str) -> list[str]:
    """Map model names to identifiers the LP format accepts, keeping them unique."""
    out, seen = [], set()
    for i, name in enumerate(names):
        clean = "".join(ch if ch in _ALLOWED else "_" for ch in name.replace("[", "(").replace("]", ")"))
        if not clean or clean[0] in string.digits + ".eE":
            clean = f"{prefix}_{clean}"
        if clean in seen:
            clean = f"{clean}#{i}"
        seen.add(clean)
        out.append(clean)
    return out


def _num(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def _expr(coefs, names) -> list[str]:
    parts = []
    for k, (j, a) in enumerate(coefs):
        sign = "-" if a < 0 else "+"
        if k == 0 and sign == "+":
            parts.append(f"{_num(abs(a))} {names[j]}")
        else:
            parts.append(f"{sign} {_num(abs(a))} {names[j]}")
    return parts


def _wrap(head: str, parts: list[str], tail: str) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > _LINE:
            lines.append(cur)
            cur = "   "
        cur += " " + p
    cur += tail
    lines.append(cur)
    return lines


def export_lp(model: MilpModel) -> str:
    vnames = lp_names(model.names, "v")
    rnames = lp_names(model.row_names, "r")
    lines = ["\\ reconstruction model", "Minimize"]
    obj = [(j, a) for j, a in enumerate(model.c) if a != 0.0]
    parts = _expr(obj, vnames)
    if model.offset:
        parts.append(f"{'-' if model.offset < 0 else '+'} {_num(abs(model.offset))}")
    lines += _wrap(" obj:", parts or ["0"], "")
    lines.append("Subject To")
    A = model.A.tocsr()
    for i in range(model.n_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        coefs = sorted(zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()))
        parts = _expr(coefs, vnames) or [f"0 {vnames[0]}"]
        lines += _wrap(f" {rnames[i]}:", parts, f" {_SENSE[model.sense[i]]} {_num(model.rhs[i])}")
    lines.append("Bounds")
    for j, name in enumerate(vnames):
        if model.binary[j]:
            continue
        lb, ub = model.lb[j], model.ub[j]
        if lb == ub:
            lines.append(f" {name} = {_num(lb)}")
        elif math.isinf(lb) and math.isinf(ub):
            lines.append(f" {name} free")
        else:
            lo_s = "-inf" if math.isinf(lb) else _num(lb)
            hi_s = "+inf" if math.isinf(ub) else _num(ub)
            lines.append(f" {lo_s} <= {name} <= {hi_s}")
    bins = [vnames[j] for j in np.flatnonzero(model.binary)]
    if bins:
        lines.append("Binaries")
        lines += _wrap("", bins, "")
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class ParsedLP:
    var_names: list[str]
    row_names: list[str]
    c: np.ndarray
    offset: float
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray


def _parse_terms(text: str) -> tuple[dict[str, float], float]:
    toks = text.split()
    coefs: dict[str, float] = {}
    const = 0.0
    sign, num = 1.0, None
    for tok in toks:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            val = float(tok)
        except ValueError:
            coefs[tok] = coefs.get(tok, 0.0) + sign * (1.0 if num is None else num)
            sign, num = 1.0, None
            continue
        if num is not None:
            const += sign * num
            sign = 1.0
        num = val
    if num is not None:
        const += sign * num
    return coefs, const


def parse_lp(text: str) -> ParsedLP:
    """Read back what :func:`export_lp` writes (one statement may span several lines)."""
    section = None
    statements: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "bin": []}
    buf = ""
    heads = {"minimize": "obj", "subject to": "rows", "bounds": "bounds", "binaries": "bin", "end": None}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        key = line.lower()
        if key in heads:
            if buf:
                statements[section].append(buf)
                buf = ""
            section = heads[key]
            continue
        if section in ("obj", "rows") and raw.startswith(" ") and not raw.startswith("    ") and ":" in line:
            if buf:
                statements[section].append(buf)
            buf = line
        elif section in ("obj", "rows"):
            buf += " " + line
        else:
            statements[section].append(line)
    if buf:
        statements[section].append(buf)

    vars_: dict[str, int] = {}

    def vid(name: str) -> int:
        return vars_.setdefault(name, len(vars_))

    obj_text = statements["obj"][0].split(":", 1)[1] if statements["obj"] else ""
    obj_coefs, offset = _parse_terms(obj_text)
    for n in obj_coefs:
        vid(n)
    rows = []
    for st in statements["rows"]:
        name, body = st.split(":", 1)
        m = re.search(r"(<=|>=|=)\s*(\S+)\s*$", body)
        coefs, const = _parse_terms(body[: m.start()])
        for n in coefs:
            vid(n)
        rows.append((name.strip(), coefs, {"<=": "L", ">=": "G", "=": "E"}[m.group(1)], float(m.group(2)) - const))
    bounds = {}
    for st in statements["bounds"]:
        toks = st.split()
        if len(toks) == 2 and toks[1] == "free":
            bounds[toks[0]] = (-math.inf, math.inf)
        elif len(toks) == 3 and toks[1] == "=":
            bounds[toks[0]] = (float(toks[2]), float(toks[2]))
        else:
            bounds[toks[2]] = (float(toks[0]), float(toks[4]))
        vid(toks[2] if len(toks) == 5 else toks[0])
    bins = [n for st in statements["bin"] for n in st.split()]
    for n in bins:
        vid(n)

    nv = len(vars_)
    c = np.zeros(nv)
    for n, a in obj_coefs.items():
        c[vars_[n]] = a
    lb, ub = np.zeros(nv), np.full(nv, math.inf)
    for n, (lo, hi) in bounds.items():
        lb[vars_[n]], ub[vars_[n]] = lo, hi
    binary = np.zeros(nv, dtype=bool)
    for n in bins:
        binary[vars_[n]] = True
        lb[vars_[n]], ub[vars_[n]] = 0.0, 1.0
    data, ri, ci = [], [], []
    for i, (_, coefs, _, _) in enumerate(rows):
        for n, a in coefs.items():
            ri.append(i)
            ci.append(vars_[n])
            data.append(a)
    A = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), nv))
    return ParsedLP(
        list(vars_), [r[0] for r in rows], c, offset, A,
        np.array([r[2] for r in rows], dtype="<U1"), np.array([r[3] for r in rows]), lb, ub, binary,
    )

"""Text file formats: space descriptions, cover witnesses, witness recipes, CSV.

Every structured file starts with a schema tag line (``coarsedim-space 1``
and so on) followed by a JSON document.  Floats are written with 12
significant digits so that outputs can be pinned byte for byte.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import math
from typing import Optional

import numpy as np

from .covers import CoverFamilySet
from .errors import DomainError, ParseError
from .metric_core import (DEFAULT_POINT_BUDGET, MetricSpace, PointedSpace, build_cayley_ball,
                          build_grid, build_tree, log_remetrize, regular_tree_parents)

SPACE_TAG = "coarsedim-space 1"
COVER_TAG = "coarsedim-cover 1"
WITNESS_TAG = "coarsedim-witness 1"

SPACE_KINDS = ("matrix", "grid", "cayley", "tree")


def fmt(x) -> str:
    return f"{float(x):.12g}"


def round12(obj):
    """Recursively round floats to 12 significant digits for stable output."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    if isinstance(obj, np.generic):
        return round12(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(round12(obj), sort_keys=True, indent=1)


def _write_tagged(tag, doc) -> str:
    return tag + "\n" + dumps(doc) + "\n"


def _read_tagged(text, tag):
    first, _, body = text.partition("\n")
    if first.strip() != tag:
        raise DomainError(f"expected schema tag {tag!r}, found {first.strip()!r}")
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", len(first) + 1 + exc.pos) from None


# spaces --------------------------------------------------------------------------

def build_space(doc: dict, budget: int = DEFAULT_POINT_BUDGET) -> PointedSpace:
    """Instantiate a space description (see :func:`dump_space`)."""
    kind = doc.get("kind")
    if kind == "grid":
        space = build_grid(int(doc["n"]), int(doc["side"]), doc.get("norm", "L1"),
                           budget=budget, offset=int(doc.get("offset", 0)))
        pointed = PointedSpace(space, int(doc.get("basepoint", 0)))
    elif kind == "cayley":
        pointed = build_cayley_ball(doc["group"], int(doc["rank"]), int(doc["radius"]),
                                    budget=budget)
        if "basepoint" in doc:
            pointed = PointedSpace(pointed.space, int(doc["basepoint"]))
    elif kind == "tree":
        parents = doc.get("parents")
        if parents is None:
            parents = regular_tree_parents(int(doc["branching"]), int(doc["depth"]))
        space = build_tree(parents, doc.get("weights"), budget=budget)
        pointed = PointedSpace(space, int(doc.get("basepoint", 0)))
    elif kind == "matrix":
        space = MetricSpace.from_lower_triangle(doc["lower"], labels=doc.get("labels"))
        if space.size > budget:
            raise DomainError(f"matrix space has {space.size} points, over the budget {budget}")
        pointed = PointedSpace(space, int(doc.get("basepoint", 0)))
    else:
        raise DomainError(f"unknown space kind {kind!r}; expected one of {SPACE_KINDS}")
    for _ in range(int(doc.get("remetrize", 0))):
        pointed = log_remetrize(pointed)
    return pointed


def dump_space(doc: dict) -> str:
    if doc.get("kind") not in SPACE_KINDS:
        raise DomainError(f"unknown space kind {doc.get('kind')!r}")
    return _write_tagged(SPACE_TAG, doc)


def load_space_doc(text: str) -> dict:
    return _read_tagged(text, SPACE_TAG)


def matrix_doc(space: MetricSpace, basepoint: int = 0) -> dict:
    t = space.table()
    return {"kind": "matrix", "basepoint": basepoint,
            "lower": [t[i, :i].tolist() for i in range(1, space.size)]}


# covers ----------------------------------------------------------------------------

def dump_cover(cover: CoverFamilySet, space_doc: Optional[dict] = None) -> str:
    doc = {"claimed_r": cover.claimed_r, "claimed_bound": cover.claimed_bound,
           "families": [[list(p) for p in fam] for fam in cover.families]}
    if space_doc is not None:
        doc["space"] = space_doc
    return _write_tagged(COVER_TAG, doc)


def load_cover(text: str, space) -> CoverFamilySet:
    doc = _read_tagged(text, COVER_TAG)
    return CoverFamilySet(space, tuple(tuple(tuple(p) for p in fam) for fam in doc["families"]),
                          float(doc["claimed_r"]), float(doc["claimed_bound"]))


# witness recipes -------------------------------------------------------------------

def dump_recipe(recipe: dict) -> str:
    return _write_tagged(WITNESS_TAG, recipe)


def load_recipe(text: str) -> dict:
    return _read_tagged(text, WITNESS_TAG)


# profiles ----------------------------------------------------------------------------

PROFILE_HEADER = ("r_lo", "r_hi", "worst_oscillation", "witness_point", "excluded", "evaluated")


def profile_csv(profile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    for a in profile.annuli:
        w.writerow([fmt(a.r_lo), fmt(a.r_hi), fmt(a.worst_oscillation), a.witness_point,
                    a.excluded, a.evaluated])
    return buf.getvalue()


# observed functions of the norm -----------------------------------------------------------

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "tanh": np.tanh, "arctan": np.arctan,
    "exp": np.exp, "log": np.log, "ln": np.log, "log1p": np.log1p, "sqrt": np.sqrt,
    "abs": np.abs, "floor": np.floor, "minimum": np.minimum, "maximum": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power, ast.Mod: np.mod}


def norm_function(expr: str):
    """Compile an expression in the norm ``n`` (e.g. ``sin(log1p(n))``)."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"invalid function expression: {exc.msg}", (exc.offset or 1) - 1) from None

    def ev(node, n):
        if isinstance(node, ast.Expression):
            return ev(node.body, n)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "n":
                return n
            if node.id in _CONSTS:
                return _CONSTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, n), ev(node.right, n))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, n)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*[ev(a, n) for a in node.args])
        raise ParseError(f"unsupported syntax {ast.dump(node)[:40]!r}",
                         getattr(node, "col_offset", 0))

    ev(tree, np.ones(1))  # surface unsupported syntax before any evaluation

    def fn(norms):
        with np.errstate(all="ignore"):
            return np.broadcast_to(ev(tree, np.asarray(norms, dtype=float)),
                                   np.shape(norms)).astype(float)
    return fn

"""JSON encodings of scalars, series, matrices and job documents.

Every document carries ``"format": 1``.  Exact scalars are four strings, one
per component of (a + b*sqrt2) + (c + d*sqrt2)*i, e.g.
``["1/2", "3*sqrt2", "0", "0"]``.  Float scalars are ``{"re": ..., "im": ...}``
decimal strings; the document states the precision in bits.

Series may also be written as expression strings such as
``"X1^2 + 2*X1*X2 - i/3*X2"``; they are parsed with :mod:`ast`, never
evaluated.
"""
from __future__ import annotations

import ast
import json
import math
from fractions import Fraction
from typing import Any

import gmpy2

from mpert.errors import ParseError, SchemaError
from mpert.matrix import SeriesMatrix
from mpert.scalar import QI2, ExactField, FloatField, format_q2, parse_q2
from mpert.series import Series, SeriesRing

FORMAT = 1


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def _digits(prec: int) -> int:
    return int(math.ceil(prec * math.log10(2))) + 2


def scalar_to_json(x, field) -> Any:
    if field.exact:
        x = QI2.coerce(x)
        return [str(x.a), format_q2(Fraction(0), x.b) if x.b else "0",
                str(x.c), format_q2(Fraction(0), x.d) if x.d else "0"]
    x = gmpy2.mpc(x)
    dig = _digits(field.prec)
    return {"re": _fmt_mpfr(x.real, dig), "im": _fmt_mpfr(x.imag, dig)}


def _fmt_mpfr(r, digits: int) -> str:
    if not r:
        return "0"
    mant, exp, _ = gmpy2.digits(r, 10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    # digits() means 0.mant * 10^exp
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1}"


def _component(text: str, want_sqrt2: bool, where: str) -> Fraction:
    try:
        p, q = parse_q2(str(text))
    except ValueError as exc:
        raise ParseError(f"bad exact component {text!r}", where) from exc
    if want_sqrt2:
        if p:
            raise ParseError(f"component {text!r} must be a multiple of sqrt2", where)
        return q
    if q:
        raise ParseError(f"component {text!r} must be rational", where)
    return p


def scalar_from_json(obj, field, where: str = "scalar"):
    if field.exact:
        if isinstance(obj, (int, str)) and not isinstance(obj, bool):
            try:
                return QI2(*parse_q2(str(obj)))
            except ValueError as exc:
                raise ParseError(f"bad exact scalar {obj!r}", where) from exc
        if not isinstance(obj, list) or len(obj) != 4:
            raise SchemaError("exact scalar must be a list of four strings", where)
        return QI2(_component(obj[0], False, where), _component(obj[1], True, where),
                   _component(obj[2], False, where), _component(obj[3], True, where))
    if isinstance(obj, (int, str)) and not isinstance(obj, bool):
        return gmpy2.mpc(gmpy2.mpfr(str(obj)))
    if isinstance(obj, list) and len(obj) == 4:
        return QI2(_component(obj[0], False, where), _component(obj[1], True, where),
                   _component(obj[2], False, where), _component(obj[3], True, where)).to_mpc()
    if not isinstance(obj, dict) or set(obj) - {"re", "im"}:
        raise SchemaError("float scalar must be {\"re\": str, \"im\": str}", where)
    try:
        return gmpy2.mpc(gmpy2.mpfr(str(obj.get("re", "0"))), gmpy2.mpfr(str(obj.get("im", "0"))))
    except ValueError as exc:
        raise ParseError(f"bad float scalar {obj!r}", where) from exc


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

class _ExprEval:
    def __init__(self, ring: SeriesRing, text: str, where: str):
        self.ring = ring
        self.text = text
        self.where = where
        self.names = {n: ring.var(k) for k, n in enumerate(ring.names)}

    def fail(self, msg: str):
        raise ParseError(f"{msg} in expression {self.text!r}", self.where)

    def const(self, c) -> Series:
        return self.ring.constant(self.ring.field(c) if not self.ring.exact else c)

    def visit(self, node) -> Series:
        ring = self.ring
        if isinstance(node, ast.Expression):
            return self.visit(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                self.fail("unsupported literal")
            seg = ast.get_source_segment(self.src, node)
            return self.const(Fraction(seg))
        if isinstance(node, ast.Name):
            if node.id in self.names:
                return self.names[node.id]
            if node.id in ("i", "I"):
                return self.const(QI2(0, 0, 1, 0))
            if node.id == "sqrt2":
                return self.const(QI2(0, 1, 0, 0))
            self.fail(f"unknown name {node.id!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.visit(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not isinstance(node.right, ast.Constant) or not isinstance(node.right.value, int) \
                        or node.right.value < 0:
                    self.fail("exponents must be nonnegative integers")
                return self.visit(node.left) ** node.right.value
            a, b = self.visit(node.left), self.visit(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                terms = b.terms
                if len(terms) != 1 or any(next(iter(terms))):
                    self.fail("division only by nonzero constants")
                c = next(iter(terms.values()))
                return a.scale(1 / c if not ring.exact else QI2.coerce(c).inverse())
        self.fail(f"unsupported syntax {type(node).__name__}")

    def run(self) -> Series:
        self.src = self.text.replace("^", "**")
        try:
            tree = ast.parse(self.src, mode="eval")
        except SyntaxError as exc:
            raise ParseError(f"syntax error in expression {self.text!r}", self.where) from exc
        return self.visit(tree)


def parse_expression(text: str, ring: SeriesRing, where: str = "expression") -> Series:
    """Series from text like ``"1 + X1^2/2 - i*X1*X2"`` (truncated at the cap)."""
    return _ExprEval(ring, text, where).run()


# ---------------------------------------------------------------------------
# series and matrices
# ---------------------------------------------------------------------------

def series_to_json(s: Series) -> dict:
    F = s.ring.field
    return {"rel": s.rel,
            "terms": [{"exp": list(e), "coeff": scalar_to_json(c, F)}
                      for e, c in s.terms.items()]}


def series_from_json(obj, ring: SeriesRing, where: str = "series") -> Series:
    if isinstance(obj, str):
        return parse_expression(obj, ring, where)
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return parse_expression(str(obj), ring, where)
    if not isinstance(obj, dict):
        raise SchemaError("series must be an expression string or {\"terms\": [...]}", where)
    extra = set(obj) - {"rel", "terms"}
    if extra:
        raise SchemaError(f"unknown series fields {sorted(extra)}", where)
    terms = {}
    for k, t in enumerate(obj.get("terms", [])):
        if not isinstance(t, dict) or set(t) != {"exp", "coeff"}:
            raise SchemaError("each term needs exactly \"exp\" and \"coeff\"", f"{where}.terms[{k}]")
        exp = t["exp"]
        if not isinstance(exp, list) or len(exp) != ring.nvars or \
                not all(isinstance(a, int) and a >= 0 for a in exp):
            raise SchemaError(f"exponent must list {ring.nvars} nonnegative integers",
                              f"{where}.terms[{k}]")
        exp = tuple(exp)
        if exp in terms:
            raise SchemaError(f"repeated exponent {list(exp)}", f"{where}.terms[{k}]")
        terms[exp] = scalar_from_json(t["coeff"], ring.field, f"{where}.terms[{k}]")
    rel = obj.get("rel", ring.cap)
    if not isinstance(rel, int) or rel < -1:
        raise SchemaError("rel must be an integer >= -1", where)
    return ring.from_dict(terms, rel=min(rel, ring.cap))


def matrix_to_json(M: SeriesMatrix) -> dict:
    return {"rows": M.rows, "cols": M.cols,
            "entries": [[series_to_json(s) for s in row] for row in M.entries]}


def matrix_from_json(obj, ring: SeriesRing, where: str = "matrix") -> SeriesMatrix:
    if isinstance(obj, list):
        obj = {"entries": obj}
    if not isinstance(obj, dict):
        raise SchemaError("matrix must be an object or a list of rows", where)
    extra = set(obj) - {"rows", "cols", "entries"}
    if extra:
        raise SchemaError(f"unknown matrix fields {sorted(extra)}", where)
    entries = obj.get("entries")
    if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
        raise SchemaError("entries must be a list of rows", where)
    rows = [[series_from_json(s, ring, f"{where}[{i}][{j}]") for j, s in enumerate(r)]
            for i, r in enumerate(entries)]
    p = len(rows)
    q = len(rows[0]) if rows else 0
    if any(len(r) != q for r in rows):
        raise SchemaError("ragged matrix rows", where)
    if obj.get("rows", p) != p or obj.get("cols", q) != q:
        raise SchemaError("rows/cols disagree with the entries", where)
    return SeriesMatrix(ring, rows)


# ---------------------------------------------------------------------------
# rings
# ---------------------------------------------------------------------------

def make_ring(variables, truncation: int, backend: str = "exact",
              precision_bits: int = 256, tolerance=None) -> SeriesRing:
    if isinstance(variables, int):
        names = [f"X{k + 1}" for k in range(variables)]
    else:
        names = list(variables)
    for n in names:
        if not isinstance(n, str) or not n.isidentifier() or n in ("i", "I", "sqrt2"):
            raise SchemaError(f"bad variable name {n!r}", "variables")
    if backend == "exact":
        field = ExactField()
    elif backend == "float":
        eps = None if tolerance is None else gmpy2.mpfr(str(tolerance))
        field = FloatField(precision_bits, eps)
    else:
        raise SchemaError(f"unknown backend {backend!r}", "backend")
    return SeriesRing(len(names), truncation, field, names)


def dumps(doc: dict) -> str:
    """Deterministic JSON text."""
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def loads(text: str, where: str = "document") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", where) from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", where)
    if doc.get("format") != FORMAT:
        raise SchemaError(f"unsupported format {doc.get('format')!r}; expected {FORMAT}", where)
    return doc

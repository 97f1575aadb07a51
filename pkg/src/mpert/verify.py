"""Independent re-verification of result bundles.

Nothing here uses :class:`mpert.series.Series` arithmetic or the product
kernels: series are plain ``{exponent: scalar}`` dicts multiplied by a naive
double loop, so a bug in the fast path cannot hide itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2

from mpert import io
from mpert.errors import SchemaError
from mpert.scalar import QI2

DEFAULT_FLOAT_TOLERANCE = 1e-20


@dataclass
class VerifyReport:
    command: str
    degree: int
    residuals: dict = field(default_factory=dict)
    tolerance: float = 0.0
    ok: bool = True

    def to_json(self) -> dict:
        return {"command": self.command, "degree": self.degree,
                "residuals": {k: float(v) for k, v in self.residuals.items()},
                "tolerance": self.tolerance, "ok": self.ok}


# ---------------------------------------------------------------------------
# naive dict series
# ---------------------------------------------------------------------------

class _Naive:
    def __init__(self, exact: bool, deg: int):
        self.exact = exact
        self.deg = deg
        self.zero = QI2(0) if exact else gmpy2.mpc(0)

    def conj(self, c):
        return c.conjugate() if self.exact else gmpy2.mpc(c.real, -c.imag)

    def series(self, obj, nvars: int, where: str) -> dict:
        if not isinstance(obj, dict) or "terms" not in obj:
            raise SchemaError("bundle series must be {\"rel\", \"terms\"} objects", where)
        F = _field(self.exact)
        out = {}
        for t in obj["terms"]:
            e = tuple(t["exp"])
            if len(e) != nvars:
                raise SchemaError("exponent length disagrees with the variables", where)
            if sum(e) <= self.deg:
                out[e] = io.scalar_from_json(t["coeff"], F, where)
        return out

    def matrix(self, obj, nvars: int, where: str) -> list[list[dict]]:
        if not isinstance(obj, dict) or "entries" not in obj:
            raise SchemaError("bundle matrix needs \"entries\"", where)
        return [[self.series(s, nvars, f"{where}[{i}][{j}]") for j, s in enumerate(r)]
                for i, r in enumerate(obj["entries"])]

    def mul(self, a: dict, b: dict) -> dict:
        out: dict = {}
        for ea, ca in a.items():
            da = sum(ea)
            for eb, cb in b.items():
                if da + sum(eb) > self.deg:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, self.zero) + ca * cb
        return out

    def add(self, a: dict, b: dict, sign: int = 1) -> dict:
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, self.zero) + (c if sign > 0 else -c)
        return out

    def matmul(self, A, B):
        n, m, p = len(A), len(B), len(B[0]) if B else 0
        out = []
        for i in range(n):
            row = []
            for j in range(p):
                acc: dict = {}
                for k in range(m):
                    acc = self.add(acc, self.mul(A[i][k], B[k][j]))
                row.append(acc)
            out.append(row)
        return out

    def adjoint(self, A, real: bool = False):
        rows, cols = len(A), len(A[0]) if A else 0
        if real:
            return [[A[i][j] for i in range(rows)] for j in range(cols)]
        return [[{e: self.conj(c) for e, c in A[i][j].items()} for i in range(rows)]
                for j in range(cols)]

    def max_abs(self, M) -> float:
        best = 0.0
        for row in M:
            for s in row:
                for c in s.values():
                    v = abs(complex(c)) if self.exact else float(abs(c))
                    best = max(best, v)
        return best

    def diff(self, A, B):
        return [[self.add(a, b, -1) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]

    def identity(self, n: int, nvars: int):
        one = QI2(1) if self.exact else gmpy2.mpc(1)
        return [[{(0,) * nvars: one} if i == j else {} for j in range(n)] for i in range(n)]


def _field(exact: bool):
    from mpert.scalar import ExactField, FloatField

    return ExactField() if exact else FloatField(gmpy2.get_context().precision)


def _diag(entries, rows: int, cols: int):
    M = [[{} for _ in range(cols)] for _ in range(rows)]
    for k, s in enumerate(entries):
        M[k][k] = s
    return M


# ---------------------------------------------------------------------------
# public entry point
# ---------------------------------------------------------------------------

def verify_bundle(doc: dict, tolerance: float | None = None) -> VerifyReport:
    """Recompute the defining identities of a result bundle from scratch."""
    for key in ("command", "variables", "truncation", "backend", "matrix", "result"):
        if key not in doc:
            raise SchemaError(f"bundle lacks {key!r}", "bundle")
    command = doc["command"]
    exact = doc["backend"] == "exact"
    if not exact:
        from mpert.scalar import FloatField

        FloatField(int(doc.get("precision_bits", 256))).activate()
    names = doc["variables"]
    nvars = len(names) if isinstance(names, list) else int(names)
    res = doc["result"]
    if not isinstance(res, dict) or "reliable_degree" not in res:
        raise SchemaError("result needs a reliable_degree", "bundle.result")
    deg = int(res["reliable_degree"])
    nv = _Naive(exact, deg)
    A = nv.matrix(doc["matrix"], nvars, "matrix")
    tol = 0.0 if exact else (DEFAULT_FLOAT_TOLERANCE if tolerance is None else tolerance)
    residuals = {}
    if command == "diagonalize":
        U = nv.matrix(res["U"], nvars, "result.U")
        D = [nv.series(s, nvars, f"result.D[{k}]") for k, s in enumerate(res["D"])]
        d = len(A)
        Uh = nv.adjoint(U)
        residuals["conjugation"] = nv.max_abs(nv.diff(nv.matmul(nv.matmul(Uh, A), U),
                                                    _diag(D, d, d)))
        I = nv.identity(d, nvars)
        residuals["unitarity"] = max(nv.max_abs(nv.diff(nv.matmul(U, Uh), I)),
                                     nv.max_abs(nv.diff(nv.matmul(Uh, U), I)))
    elif command == "realform":
        O = nv.matrix(res["O"], nvars, "result.O")
        d = len(A)
        Bm = [[{} for _ in range(d)] for _ in range(d)]
        pos = 0
        for k, blk in enumerate(res["blocks"]):
            if "lambda" in blk:
                Bm[pos][pos] = nv.series(blk["lambda"], nvars, f"result.blocks[{k}]")
                pos += 1
            else:
                a = nv.series(blk["a"], nvars, f"result.blocks[{k}].a")
                b = nv.series(blk["b"], nvars, f"result.blocks[{k}].b")
                Bm[pos][pos] = Bm[pos + 1][pos + 1] = a
                Bm[pos][pos + 1] = b
                Bm[pos + 1][pos] = {e: -c for e, c in b.items()}
                pos += 2
        Ot = nv.adjoint(O, real=True)
        residuals["conjugation"] = nv.max_abs(nv.diff(nv.matmul(nv.matmul(Ot, A), O), Bm))
        residuals["orthogonality"] = nv.max_abs(nv.diff(nv.matmul(Ot, O),
                                                      nv.identity(d, nvars)))
        residuals["imaginary_parts"] = max(
            (abs(complex(c).imag) if exact else float(abs(c.imag))
             for row in O for s in row for c in s.values()), default=0.0)
    elif command == "svd":
        V = nv.matrix(res["V"], nvars, "result.V")
        U = nv.matrix(res["U"], nvars, "result.U")
        D = nv.matrix(res["D"], nvars, "result.D")
        real = bool(res.get("real", False))
        Vh = nv.adjoint(V, real)
        Uh = nv.adjoint(U, real)
        residuals["conjugation"] = nv.max_abs(nv.diff(nv.matmul(nv.matmul(Vh, A), U), D))
        residuals["unitarity"] = max(
            nv.max_abs(nv.diff(nv.matmul(V, Vh), nv.identity(len(V), nvars))),
            nv.max_abs(nv.diff(nv.matmul(U, Uh), nv.identity(len(U), nvars))))
        m, d = len(D), len(D[0]) if D else 0
        residuals["off_diagonal"] = 0.0
        for i in range(m):
            for j in range(d):
                if i == j or (res.get("mode") == "real-block" and abs(i - j) == 1):
                    continue
                residuals["off_diagonal"] = max(residuals["off_diagonal"],
                                                nv.max_abs([[D[i][j]]]))
    else:
        raise SchemaError(f"cannot verify bundles of command {command!r}", "bundle.command")
    ok = all(v <= tol for v in residuals.values())
    return VerifyReport(command=command, degree=deg, residuals=residuals, tolerance=tol, ok=ok)

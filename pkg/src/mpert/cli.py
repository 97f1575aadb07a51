"""Command line front end.

One job per invocation.  Input and output are the same JSON format, so the
output of ``diagonalize``, ``realform`` or ``svd`` can be fed to ``verify``
and the output of ``pullback`` can be fed to any other subcommand.

Exit codes: 0 success, 2 parse/schema error, 3 hypothesis violated,
4 exact field too small, 5 tolerance/residual breach, 6 algebra error,
1 unexpected internal error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Any

from mpert import io
from mpert.diagonalize import (
    diagonalize_normal,
    real_residual,
    realify,
    well_ordered_check,
)
from mpert.discriminants import hypothesis_check
from mpert.errors import (
    HypothesisViolated,
    MpertError,
    ParseError,
    ResidualFailure,
    SchemaError,
)
from mpert.series import substitute_monomial_map
from mpert.svd import svd_monomial_refine, svd_series
from mpert.verify import DEFAULT_FLOAT_TOLERANCE, verify_bundle

COMMANDS = ("check", "diagonalize", "realform", "svd", "pullback", "verify")
EXIT_OK = 0
EXIT_INTERNAL = 1

DEFAULTS = {
    "backend": "exact",
    "precision_bits": 256,
    "tolerance": None,
    "refine": False,
    "real": False,
    "hypothesis_gate": False,
}


@dataclass
class JobSpec:
    command: str
    variables: list
    truncation: int
    matrix: Any = None
    backend: str = "exact"
    precision_bits: int = 256
    tolerance: str | None = None
    refine: bool = False
    real: bool = False
    hypothesis_gate: bool = False
    map: list = field(default_factory=list)
    bundle: dict | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "JobSpec":
        if not isinstance(doc, dict):
            raise SchemaError("job must be a JSON object", "job")
        known = {f.name for f in fields(cls)} | {"format"}
        extra = set(doc) - known
        if extra:
            raise SchemaError(f"unknown job fields {sorted(extra)}", "job")
        if doc.get("format", io.FORMAT) != io.FORMAT:
            raise SchemaError(f"unsupported format {doc.get('format')!r}", "job")
        for key in ("command", "variables", "truncation"):
            if key not in doc:
                raise SchemaError(f"job lacks {key!r}", "job")
        job = cls(**{k: v for k, v in doc.items() if k != "format"})
        job.validate()
        return job

    def to_dict(self) -> dict:
        out: dict = {"format": io.FORMAT}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("bundle", "matrix", "map", "tolerance") and v in (None, []):
                continue
            out[f.name] = v
        return out

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}", "job.command")
        if isinstance(self.variables, int) and not isinstance(self.variables, bool):
            self.variables = [f"X{k + 1}" for k in range(self.variables)]
        if not isinstance(self.variables, list):
            raise SchemaError("variables must be a list of names or a count", "job.variables")
        if not isinstance(self.truncation, int) or isinstance(self.truncation, bool) \
                or self.truncation < 0:
            raise SchemaError("truncation must be a nonnegative integer", "job.truncation")
        if self.backend not in ("exact", "float"):
            raise SchemaError(f"unknown backend {self.backend!r}", "job.backend")
        if not isinstance(self.precision_bits, int) or self.precision_bits < 53:
            raise SchemaError("precision_bits must be an integer >= 53", "job.precision_bits")
        if self.tolerance is not None:
            try:
                if float(self.tolerance) <= 0:
                    raise ValueError
            except (TypeError, ValueError):
                raise SchemaError("tolerance must be a positive number", "job.tolerance") from None
            self.tolerance = str(self.tolerance)
        for name in ("refine", "real", "hypothesis_gate"):
            if not isinstance(getattr(self, name), bool):
                raise SchemaError(f"{name} must be a boolean", f"job.{name}")
        if not isinstance(self.map, list) or not all(isinstance(m, str) for m in self.map):
            raise SchemaError("map must be a list of \"Xi=monomial\" strings", "job.map")
        if self.command != "verify" and self.matrix is None:
            raise SchemaError("job lacks a matrix", "job.matrix")

    def ring(self):
        return io.make_ring(self.variables, self.truncation, self.backend,
                            self.precision_bits, self.tolerance)


# ---------------------------------------------------------------------------
# result encoding
# ---------------------------------------------------------------------------

def _exp(e):
    return None if e is None else list(e)


def _report_json(rep) -> dict:
    return {
        "l_star": rep.l_star,
        "delta": io.series_to_json(rep.delta),
        "monomial_unit": rep.monomial_unit,
        "exponent": _exp(rep.exponent),
        "last_coeff_monomial_unit": rep.last_coeff_monomial_unit,
        "last_coeff_index": rep.last_coeff_index,
        "last_coeff_exponent": _exp(rep.last_coeff_exponent),
        "reliable_degree": rep.reliable_degree,
        "discriminants": [io.series_to_json(s) for s in rep.discriminants],
    }


def _residual_json(r) -> dict:
    return {"conjugation": float(r.conjugation), "unitarity": float(r.unitarity),
            "degree": r.degree}


def _block_json(blk) -> dict:
    if isinstance(blk, tuple):
        return {"a": io.series_to_json(blk[0]), "b": io.series_to_json(blk[1])}
    return {"lambda": io.series_to_json(blk)}


def _residual_limit(job: JobSpec) -> float:
    return 0.0 if job.backend == "exact" else DEFAULT_FLOAT_TOLERANCE


def _check_residual(job: JobSpec, r, locus: str) -> None:
    limit = _residual_limit(job)
    if r.conjugation > limit or r.unitarity > limit:
        raise ResidualFailure(
            f"residual {max(r.conjugation, r.unitarity):.3e} exceeds {limit:.1e}", locus)


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------

def parse_map(items, ring) -> dict:
    """``["X2=X1*X2"]`` -> {1: Series}.  Targets must be monic monomials of degree >= 1."""
    out = {}
    for item in items:
        if item.count("=") != 1:
            raise ParseError(f"map entry {item!r} must look like X2=X1*X2", "map")
        lhs, rhs = (t.strip() for t in item.split("="))
        if lhs not in ring.names:
            raise ParseError(f"unknown variable {lhs!r} in map", "map")
        idx = ring.names.index(lhs)
        if idx in out:
            raise ParseError(f"variable {lhs!r} mapped twice", "map")
        t = io.parse_expression(rhs, ring, "map")
        terms = t.terms
        if len(terms) != 1:
            raise ParseError(f"map target {rhs!r} is not a monomial", "map")
        (e, c), = terms.items()
        if sum(e) < 1 or c != ring.field.one:
            raise ParseError(f"map target {rhs!r} must be a monic monomial of degree >= 1", "map")
        out[idx] = t
    return out


def _head(job: JobSpec, A) -> dict:
    doc = {"format": io.FORMAT, "command": job.command, "variables": list(job.variables),
           "truncation": job.truncation, "backend": job.backend}
    if job.backend == "float":
        doc["precision_bits"] = job.precision_bits
        if job.tolerance is not None:
            doc["tolerance"] = job.tolerance
    doc["matrix"] = io.matrix_to_json(A)
    return doc


def _run_check(job, A):
    rep = hypothesis_check(A)
    doc = _head(job, A)
    doc["result"] = _report_json(rep)
    ok = rep.monomial_unit
    doc["status"] = "ok" if ok else "hypothesis-violated"
    return doc, EXIT_OK if ok else HypothesisViolated.exit_code


def _gate(job, A):
    if job.hypothesis_gate:
        rep = hypothesis_check(A)
        if not rep.monomial_unit:
            raise HypothesisViolated("discriminant is not a monomial times a unit", "gate")


def _run_diagonalize(job, A):
    _gate(job, A)
    res = diagonalize_normal(A)
    doc = _head(job, A)
    doc["result"] = {
        "U": io.matrix_to_json(res.U),
        "D": [io.series_to_json(s) for s in res.D],
        "reliable_degree": res.reliable_degree,
        "well_ordered": well_ordered_check(res),
        "ledger": [{"locus": r.locus, "size": r.size,
                    "trace_shift": io.series_to_json(r.trace_shift),
                    "gamma": _exp(r.gamma),
                    "split": _exp(r.split)} for r in res.ledger],
    }
    doc["residual"] = _residual_json(res.residual)
    _check_residual(job, res.residual, "residual")
    doc["status"] = "ok"
    return doc, EXIT_OK


def _run_realform(job, A):
    _gate(job, A)
    rf = realify(A)
    r = rf.residual if rf.residual is not None else real_residual(A, rf)
    rel = min([rf.O.rel] + [s.rel for blk in rf.blocks
                            for s in (blk if isinstance(blk, tuple) else (blk,))])
    doc = _head(job, A)
    doc["result"] = {
        "O": io.matrix_to_json(rf.O),
        "s": rf.s,
        "blocks": [_block_json(b) for b in rf.blocks],
        "reliable_degree": rel,
    }
    doc["residual"] = {"conjugation": float(r.conjugation),
                       "orthogonality": float(r.unitarity), "degree": r.degree}
    _check_residual(job, r, "residual")
    doc["status"] = "ok"
    return doc, EXIT_OK


def _run_svd(job, A):
    res = svd_series(A, real=job.real, hypothesis_gate=job.hypothesis_gate)
    if job.refine:
        res = svd_monomial_refine(res)
    doc = _head(job, A)
    doc["result"] = {
        "V": io.matrix_to_json(res.V),
        "U": io.matrix_to_json(res.U),
        "D": io.matrix_to_json(res.D),
        "entries": [_block_json(b) for b in res.entries],
        "mode": res.mode,
        "real": res.real,
        "reliable_degree": res.reliable_degree,
        "well_ordered": res.well_ordered,
        "exponents": [_exp(e) for e in res.exponents],
    }
    if res.residual is not None:
        doc["residual"] = _residual_json(res.residual)
        _check_residual(job, res.residual, "residual")
    doc["status"] = "ok"
    return doc, EXIT_OK


def _run_pullback(job, A):
    ring = A.ring
    mapping = parse_map(job.map, ring)
    if not mapping:
        raise ParseError("pullback needs at least one --map entry", "map")
    B = A.map(lambda s: substitute_monomial_map(s, mapping))
    doc = {"format": io.FORMAT, "variables": list(job.variables),
           "truncation": job.truncation, "backend": job.backend}
    if job.backend == "float":
        doc["precision_bits"] = job.precision_bits
    doc["matrix"] = io.matrix_to_json(B)
    return doc, EXIT_OK


def _run_verify(job):
    bundle = job.bundle
    if bundle is None:
        raise SchemaError("verify needs a result bundle", "bundle")
    tol = None if job.tolerance is None else float(job.tolerance)
    rep = verify_bundle(bundle, tol)
    doc = {"format": io.FORMAT, "command": "verify", "verified": bundle.get("command"),
           "report": rep.to_json(), "status": "ok" if rep.ok else "residual-failure"}
    return doc, EXIT_OK if rep.ok else ResidualFailure.exit_code


PIPELINES = {
    "check": _run_check,
    "diagonalize": _run_diagonalize,
    "realform": _run_realform,
    "svd": _run_svd,
    "pullback": _run_pullback,
}


def error_document(exc: BaseException, command: str | None = None) -> tuple[dict, int]:
    if isinstance(exc, MpertError):
        code = exc.exit_code
        doc = {"format": io.FORMAT, "command": command, "status": "error",
               "error": {"class": type(exc).__name__, "family": _family(exc),
                         "message": Exception.__str__(exc), "locus": exc.locus,
                         "exit_code": code}}
        return doc, code
    doc = {"format": io.FORMAT, "command": command, "status": "error",
           "error": {"class": type(exc).__name__, "family": "internal",
                     "message": str(exc), "locus": None, "exit_code": EXIT_INTERNAL}}
    return doc, EXIT_INTERNAL


_FAMILIES = {2: "parse", 3: "hypothesis", 4: "field-limitation", 5: "tolerance", 6: "algebra"}


def _family(exc: MpertError) -> str:
    return _FAMILIES.get(exc.exit_code, "algebra")


def run(job: JobSpec) -> tuple[dict, int]:
    """Execute a job; returns (output document, exit code).  Never raises
    for library errors: they become error documents."""
    try:
        job.validate()
        if job.command == "verify":
            return _run_verify(job)
        ring = job.ring()
        A = io.matrix_from_json(job.matrix, ring)
        return PIPELINES[job.command](job, A)
    except MpertError as exc:
        return error_document(exc, job.command)
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        return error_document(exc, job.command)


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        v = int(raw)
    except ValueError:
        raise ParseError(f"environment variable {name}={raw!r} is not an integer", name) from None
    if v < 1:
        raise ParseError(f"environment variable {name} must be positive", name)
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mpert",
        description="Perturbation of normal matrices over truncated power series.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("input", help="job or bundle JSON file ('-' for stdin)")
        sp.add_argument("-o", "--output", help="write JSON here instead of stdout")
        sp.add_argument("--backend", choices=("exact", "float"))
        sp.add_argument("--precision-bits", type=int)
        sp.add_argument("--tolerance", help="float zero threshold (or verify tolerance)")
        sp.add_argument("--truncation", type=int)
        sp.add_argument("--refine", action="store_true", default=None)
        sp.add_argument("--real", action="store_true", default=None)
        sp.add_argument("--hypothesis-gate", action="store_true", default=None)
        sp.add_argument("--map", action="append", default=None,
                        help="monomial substitution such as X2=X1*X2 (repeatable)")
    return p


def job_from_args(args, doc: dict) -> JobSpec:
    """Merge sources: command line flag > environment > file > default."""
    if args.command == "verify":
        tol = args.tolerance
        return JobSpec(command="verify", variables=list(doc.get("variables", [])) or [],
                       truncation=int(doc.get("truncation", 0)), tolerance=tol, bundle=doc)
    known = {f.name for f in fields(JobSpec)} | {"format"}
    extra = set(doc) - known
    if extra:
        raise SchemaError(f"unknown job fields {sorted(extra)}", "job")
    merged = dict(DEFAULTS)
    merged.update({k: v for k, v in doc.items() if k != "format"})
    env_bits = _env_int("MPERT_PRECISION_BITS")
    if env_bits is not None:
        merged["precision_bits"] = env_bits
    _env_int("MPERT_THREADS")
    merged["command"] = args.command
    for flag in ("backend", "precision_bits", "tolerance", "truncation",
                 "refine", "real", "hypothesis_gate", "map"):
        v = getattr(args, flag)
        if v is not None:
            merged[flag] = v
    for key in ("variables", "truncation"):
        if key not in merged:
            raise SchemaError(f"job lacks {key!r}", "job")
    merged.setdefault("map", [])
    return JobSpec(**merged)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", path) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = io.loads(_read(args.input), args.input)
        job = job_from_args(args, doc)
        out, code = run(job)
    except MpertError as exc:
        out, code = error_document(exc, args.command)
    text = io.dumps(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code and out.get("status") == "error":
        err = out["error"]
        loc = f" at {err['locus']}" if err.get("locus") else ""
        print(f"mpert: {err['class']}{loc}: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

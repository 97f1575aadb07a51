"""Unitary diagonalization of normal series matrices and the real normal form.

:func:`diagonalize_normal` recurses: shift by the mean eigenvalue, divide
by the monomial content of all entries, split the constant part into two
spectrally disjoint blocks, lift the split with :func:`mpert.hensel.hensel_split`
and recurse on both blocks.  It fails with :class:`HypothesisViolated` when
the rescaled matrix vanishes at the origin, which happens exactly when the
discriminant is not a monomial times a unit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from mpert.errors import (
    HypothesisViolated,
    NotASquareInField,
    NotMonomialUnit,
    NotNormal,
    NotReal,
    PairingFailure,
)
from mpert.hensel import constant_normal_split, hensel_split
from mpert.matrix import SeriesMatrix, adjoint, is_normal, matmul
from mpert.scalar import QI2, q2_sqrt
from mpert.series import (
    Series,
    grlex_key,
    invert_unit,
    is_monomial_times_unit,
    monomial_content,
    sqrt_unit,
)


@dataclass
class ShiftRecord:
    """What one recursion node did: trace shift, monomial factor, split sizes."""

    locus: str
    size: int
    trace_shift: Series
    gamma: tuple | None
    split: tuple | None


@dataclass
class ResidualReport:
    """Largest coefficient magnitudes of the defining identities."""

    conjugation: float
    unitarity: float
    degree: int

    def within(self, tol: float) -> bool:
        return self.conjugation <= tol and self.unitarity <= tol


@dataclass
class DiagonalizationResult:
    U: SeriesMatrix
    D: list
    ledger: list = field(default_factory=list)
    residual: ResidualReport | None = None

    @property
    def reliable_degree(self) -> int:
        return min([self.U.rel] + [s.rel for s in self.D])

    def diagonal_matrix(self) -> SeriesMatrix:
        return SeriesMatrix.diag(self.U.ring, self.D)


@dataclass
class RealNormalForm:
    """``O^T A O`` = 2x2 blocks [[a, b], [-b, a]] followed by real eigenvalues."""

    O: SeriesMatrix
    s: int
    blocks: list
    residual: ResidualReport | None = None
    source: DiagonalizationResult | None = None

    def block_matrix(self) -> SeriesMatrix:
        ring = self.O.ring
        d = self.O.rows
        z = ring.zero()
        rows = [[z] * d for _ in range(d)]
        pos = 0
        for blk in self.blocks:
            if isinstance(blk, tuple):
                a, b = blk
                rows[pos][pos], rows[pos][pos + 1] = a, b
                rows[pos + 1][pos], rows[pos + 1][pos + 1] = -b, a
                pos += 2
            else:
                rows[pos][pos] = blk
                pos += 1
        return SeriesMatrix(ring, rows)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def matrix_content(M: SeriesMatrix) -> tuple | None:
    """Coordinatewise minimum exponent over all nonzero entries."""
    gamma = None
    for row in M.entries:
        for s in row:
            if s.is_zero():
                continue
            g = monomial_content(s)
            gamma = g if gamma is None else tuple(min(a, b) for a, b in zip(gamma, g))
    return gamma


def leading_term(s: Series):
    """(exponent, coefficient) of the first term in graded-lex order."""
    for e, c in s.terms.items():
        return e, c
    return None


def _coeff_key(c) -> tuple:
    z = complex(c) if isinstance(c, QI2) else complex(float(c.real), float(c.imag))
    return (-round(z.real, 12), -round(z.imag, 12))


def canonical_key(s: Series):
    """Sort key: leading exponent in graded-lex order, then leading coefficient.

    Remaining terms break ties; coefficients are compared after rounding so
    float noise does not reorder equal entries.
    """
    terms = list(s.terms.items())
    if not terms:
        return (1, ())
    return (0, tuple((grlex_key(e), _coeff_key(c)) for e, c in terms))


def canonical_order(D) -> list[int]:
    """Permutation sorting eigenvalue series into canonical order."""
    return sorted(range(len(D)), key=lambda i: canonical_key(D[i]))


def _const_matrix(ring, M) -> SeriesMatrix:
    return SeriesMatrix.from_constants(ring, M)


def _negligible_series(s: Series, scale=1) -> bool:
    if s.exact:
        return s.is_zero()
    return s.max_abs_mp() <= s.ring.field.eps * max(1, scale) * 64


def residual_report(A: SeriesMatrix, U: SeriesMatrix, D) -> ResidualReport:
    ring = A.ring
    d = A.rows
    Uh = adjoint(U)
    R = matmul(matmul(Uh, A), U) - SeriesMatrix.diag(ring, list(D))
    I = SeriesMatrix.identity(ring, d)
    E1 = matmul(U, Uh) - I
    E2 = matmul(Uh, U) - I
    return ResidualReport(
        conjugation=R.max_abs(),
        unitarity=max(E1.max_abs(), E2.max_abs()),
        degree=min(R.rel, E1.rel, E2.rel),
    )


# ---------------------------------------------------------------------------
# complex diagonalization
# ---------------------------------------------------------------------------

def _diag_rec(A: SeriesMatrix, locus: str, ledger: list):
    ring = A.ring
    d = A.rows
    if d == 1:
        return SeriesMatrix.identity(ring, 1), [A.entries[0][0]]
    # already diagonal: nothing to do, whatever the discriminant looks like
    dscale = max(gmpy2.mpfr(1), A.max_abs_mp()) if not ring.exact else 1
    if all(_negligible_series(A.entries[i][j], dscale)
           for i in range(d) for j in range(d) if i != j):
        ledger.append(ShiftRecord(locus, d, ring.zero(), None, None))
        return SeriesMatrix.identity(ring, d), [A.entries[i][i] for i in range(d)]
    t = A.trace().scale(Fraction(1, d))
    Ahat = SeriesMatrix(ring, [[(s - t) if i == j else s for j, s in enumerate(row)]
                               for i, row in enumerate(A.entries)])
    scale = max(gmpy2.mpfr(1), A.max_abs_mp()) if not ring.exact else 1
    if not ring.exact:
        chop_tol = ring.field.eps * scale * 16
        t = t.chop(chop_tol)
        Ahat = Ahat.map(lambda s: s.chop(chop_tol))
    if all(_negligible_series(s, scale) for row in Ahat.entries for s in row):
        ledger.append(ShiftRecord(locus, d, t, None, None))
        return SeriesMatrix.identity(ring, d), [t] * d
    gamma = matrix_content(Ahat)
    B = Ahat.div_monomial(gamma)
    B0 = B.constant()
    F = ring.field
    if all(F.is_zero(c, scale) for row in B0 for c in row):
        raise HypothesisViolated(
            "matrix divided by its monomial content vanishes at the origin; "
            "the discriminant is not a monomial times a unit", locus)
    cert = constant_normal_split(B0, F)
    ledger.append(ShiftRecord(locus, d, t, gamma, cert.sizes))
    Q0 = _const_matrix(ring, cert.Q0)
    Bq = matmul(matmul(adjoint(Q0), B), Q0)
    H = hensel_split(Bq, cert, locus)
    U1, D1 = _diag_rec(H.B1, locus + ".1", ledger)
    U2, D2 = _diag_rec(H.B2, locus + ".2", ledger)
    D = [s.mul_monomial(gamma) + t for s in D1 + D2]
    U = matmul(matmul(Q0, H.U), SeriesMatrix.block_diag(U1, U2))
    return U, D


def diagonalize_normal(A: SeriesMatrix, check_normal: bool = True,
                       with_residual: bool = True) -> DiagonalizationResult:
    """Unitary U and eigenvalue series D with U^* A U = diag(D) mod the cap."""
    A._square()
    if check_normal and not is_normal(A):
        raise NotNormal("input matrix is not normal modulo its reliable degree", "root")
    ledger: list = []
    U, D = _diag_rec(A, "root", ledger)
    res = DiagonalizationResult(U, D, ledger)
    if with_residual:
        res.residual = residual_report(A, U, D)
    return res


def well_ordered_check(result) -> bool:
    """Are the monomial exponents of the nonzero diagonal entries totally ordered?

    Accepts a diagonalization or SVD result, or a sequence of series.  Every
    nonzero entry must be a monomial times a unit (else :class:`NotMonomialUnit`).
    """
    if hasattr(result, "entries") and not isinstance(result, SeriesMatrix):
        D = result.entries
    elif hasattr(result, "D") and not isinstance(result, SeriesMatrix):
        D = result.D
    else:
        D = result
    exps = []
    for s in D:
        if isinstance(s, tuple):
            raise NotMonomialUnit("2x2 real blocks carry no single exponent")
        if s.is_zero():
            continue
        flag, e = is_monomial_times_unit(s)
        if not flag:
            raise NotMonomialUnit(f"diagonal entry {s} is not a monomial times a unit")
        exps.append(e)
    for i in range(len(exps)):
        for j in range(i + 1, len(exps)):
            a, b = exps[i], exps[j]
            if not (all(x <= y for x, y in zip(a, b)) or all(x >= y for x, y in zip(a, b))):
                return False
    return True


# ---------------------------------------------------------------------------
# real normal form
# ---------------------------------------------------------------------------

def _pair_tolerance(D) -> float:
    scale = max([1.0] + [s.max_abs() for s in D])
    return 2.0 ** -64 * scale


def _series_equal(a: Series, b: Series, tol) -> bool:
    if a.exact:
        return a.equal_mod(b)
    diff = (a - b).truncate(min(a.rel, b.rel))
    return diff.max_abs() <= tol


def _constant_phase(v: list[Series], F):
    """Unit scalar c making the first nonzero constant entry of c*v real positive, or None."""
    for s in v:
        c0 = s.constant()
        if F.is_zero(c0):
            continue
        if F.exact:
            n = F.abs2(c0)
            root = q2_sqrt(n.a, n.b)
            if root is None:
                return None
            return F.conj(c0) * QI2(root[0], root[1]).inverse()
        return F.conj(c0) / abs(c0)
    return None


def _real_vector(v: list[Series]) -> bool:
    return all(s.is_real() for s in v)


def _vdot(u: list[Series], v: list[Series], ring) -> Series:
    out = ring.zero()
    for a, b in zip(u, v):
        out = out + a.conj() * b
    return out


def _real_orthonormal(cols: list[list[Series]], ring) -> list[list[Series]]:
    """Real orthonormal basis of the real span of a conjugation-closed column set."""
    F = ring.field
    out = []
    for v in cols:
        if _real_vector(v):
            out.append(v)
            continue
        c = _constant_phase(v, F)
        if c is not None:
            w = [s.scale(c) for s in v]
            if _real_vector(w):
                out.append(w)
                continue
        out.append(None)
    if all(w is not None for w in out):
        return out
    # Gram-Schmidt on real and imaginary parts
    cands = []
    for v in cols:
        cands.append([s.real_part() for s in v])
        cands.append([s.imag_part() for s in v])
    basis: list[list[Series]] = []
    while len(basis) < len(cols):
        best = None
        for w in cands:
            for b in basis:
                coef = _vdot(b, w, ring)
                w = [x - y * coef for x, y in zip(w, b)]
            n = _vdot(w, w, ring)
            mag = abs(complex(n.constant())) if ring.exact else float(abs(n.constant()))
            if best is None or mag > best[0]:
                best = (mag, w, n)
        mag, w, n = best
        if mag == 0:
            raise PairingFailure("real eigenvector extraction lost rank")
        try:
            inv = invert_unit(sqrt_unit(n))
        except NotASquareInField as exc:
            raise NotASquareInField(f"normalizing a real eigenvector: {exc}") from exc
        basis.append([x * inv for x in w])
        cands = [c for c in cands if c is not w]
    return basis


def realify(A: SeriesMatrix, result: DiagonalizationResult | None = None) -> RealNormalForm:
    """Real orthogonal O with O^T A O in 2x2 rotation blocks plus real eigenvalues."""
    if not A.is_real():
        raise NotReal("realify expects a matrix with real series entries")
    ring = A.ring
    F = ring.field
    res = result if result is not None else diagonalize_normal(A)
    D, U = res.D, res.U
    d = len(D)
    tol = _pair_tolerance(D)
    cols = [[U.entries[i][j] for i in range(d)] for j in range(d)]
    conj = [s.conj() for s in D]
    is_real_eig = [_series_equal(D[j], conj[j], tol) for j in range(d)]
    symmetric = all(A.entries[i][j] == A.entries[j][i] for i in range(d) for j in range(d)) \
        if ring.exact else _negligible_matrix(A - A.transpose())
    used = [False] * d
    pairs = []
    for j in range(d):
        if used[j] or is_real_eig[j]:
            continue
        partner = None
        for k in range(d):
            if k != j and not used[k] and not is_real_eig[k] and _series_equal(D[k], conj[j], tol):
                partner = k
                break
        if partner is None:
            raise PairingFailure(f"eigenvalue {D[j]} has no conjugate partner")
        used[j] = used[partner] = True
        # pick the member with negative leading imaginary part so that b > 0
        lt = leading_term(D[j].imag_part())
        neg = lt is not None and (F.real_sign(lt[1]) < 0)
        first = j if neg else partner
        pairs.append(first)
    if symmetric and pairs:
        raise PairingFailure("symmetric input produced non-real eigenvalues")
    inv_sqrt2 = F(QI2(0, Fraction(1, 2))) if ring.exact else F(1) / gmpy2.sqrt(gmpy2.mpfr(2))
    i_unit = F.i
    Ocols: list[list[Series]] = []
    blocks: list = []
    for j in pairs:
        v = cols[j]
        c = _constant_phase(v, F)
        if c is not None:
            v = [s.scale(c) for s in v]
        vb = [s.conj() for s in v]
        u1 = [(x + y).scale(inv_sqrt2) for x, y in zip(v, vb)]
        u2 = [(x - y).scale(i_unit * inv_sqrt2) for x, y in zip(v, vb)]
        lam = D[j]
        a = (lam + lam.conj()).scale(Fraction(1, 2)).real_part()
        b = (lam - lam.conj()).scale(i_unit * F(Fraction(1, 2))).real_part()
        Ocols.extend([[s.real_part() for s in u1], [s.real_part() for s in u2]])
        blocks.append((a, b))
    # real eigenvalues, grouped by equal value
    groups: list[list[int]] = []
    for j in range(d):
        if not is_real_eig[j]:
            continue
        for g in groups:
            if _series_equal(D[g[0]], D[j], tol):
                g.append(j)
                break
        else:
            groups.append([j])
    for g in groups:
        basis = _real_orthonormal([cols[j] for j in g], ring)
        for j, w in zip(g, basis):
            Ocols.append([s.real_part() for s in w])
            blocks.append(D[j].real_part())
    O = SeriesMatrix(ring, [[Ocols[j][i] for j in range(d)] for i in range(d)])
    out = RealNormalForm(O, len(pairs), blocks, source=res)
    out.residual = real_residual(A, out)
    return out


def _negligible_matrix(M: SeriesMatrix) -> bool:
    return all(_negligible_series(s) for row in M.entries for s in row)


def real_residual(A: SeriesMatrix, rf: RealNormalForm) -> ResidualReport:
    ring = A.ring
    O = rf.O
    Ot = O.transpose()
    R = matmul(matmul(Ot, A), O) - rf.block_matrix()
    I = SeriesMatrix.identity(ring, O.rows)
    E = matmul(Ot, O) - I
    return ResidualReport(conjugation=R.max_abs(), unitarity=E.max_abs(),
                          degree=min(R.rel, E.rel))

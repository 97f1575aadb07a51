"""Unitary Hensel splitting of normal series matrices.

The pieces are

* :func:`extended_euclid` - Bezout certificates for coprime polynomials;
* :func:`cohn_sylvester_solve` - the explicit solution of ``A M - M B = C``
  built from such a certificate;
* :func:`constant_normal_split` - a constant unitary putting a constant normal
  matrix in block form with spectrally disjoint blocks;
* :func:`hensel_split` - the order by order lifting of that block form to the
  whole series matrix, using Cayley factors of skew-Hermitian corrections.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath

from mpert import linalg
from mpert.errors import (
    NormalityViolation,
    NotCoprime,
    SingleEigenvalue,
    SpectrumNotSplit,
    SylvesterFailure,
)
from mpert.matrix import SeriesMatrix, adjoint, matmul
from mpert.scalar import QI2, q2_sqrt
from mpert.series import SeriesRing

log = logging.getLogger(__name__)

extended_euclid = linalg.extended_euclid


# ---------------------------------------------------------------------------
# Sylvester equations
# ---------------------------------------------------------------------------

class CohnOperator:
    """The linear map C -> M solving ``A M - M B = C`` for fixed A, B.

    With U P_A + V P_B = 1 and Q = V P_B = sum q_i Z^i the solution is
    M = sum_i q_i sum_{k<i} A^k C B^(i-k-1).  The map is tabulated once as
    a (pq) x (pq) array so that each monomial coefficient costs one
    matrix-vector product.
    """

    def __init__(self, A, B, F, euclid=None):
        self.F = F
        self.p, self.q = len(A), len(B)
        p, q = self.p, self.q
        PA, PB = linalg.charpoly(A, F), linalg.charpoly(B, F)
        if euclid is None:
            try:
                euclid = linalg.extended_euclid(PA, PB, F)
            except NotCoprime as exc:
                raise SylvesterFailure(str(exc)) from exc
        self.euclid = euclid
        Qpoly = linalg.pmul(euclid[1], PB, F)
        r = len(Qpoly) - 1
        Apow = [linalg.eye(p, F)]
        Bpow = [linalg.eye(q, F)]
        for _ in range(max(0, r - 1)):
            Apow.append(linalg.mmul(Apow[-1], A, F))
            Bpow.append(linalg.mmul(Bpow[-1], B, F))
        K = [[F.zero] * (p * q) for _ in range(p * q)]
        for i in range(1, r + 1):
            qi = Qpoly[i]
            if F.is_zero(qi):
                continue
            for k in range(i):
                Ak, Bm = Apow[k], Bpow[i - 1 - k]
                for s in range(p):
                    for a in range(p):
                        w = qi * Ak[s][a]
                        if F.is_zero(w):
                            continue
                        for t in range(q):
                            for b in range(q):
                                v = Bm[b][t]
                                if v:
                                    K[s * q + t][a * q + b] = K[s * q + t][a * q + b] + w * v
        self.K = K

    def apply_const(self, C) -> list[list]:
        p, q, F = self.p, self.q, self.F
        vec = [C[a][b] for a in range(p) for b in range(q)]
        out = [[F.zero] * q for _ in range(p)]
        for s in range(p):
            for t in range(q):
                row = self.K[s * q + t]
                acc = F.zero
                for idx, v in enumerate(vec):
                    if row[idx] and v:
                        acc = acc + row[idx] * v
                out[s][t] = acc
        return out

    def apply(self, C: SeriesMatrix) -> SeriesMatrix:
        ring = C.ring
        p, q, F = self.p, self.q, self.F
        flat = [C.entries[a][b] for a in range(p) for b in range(q)]
        rows = []
        for s in range(p):
            row = []
            for t in range(q):
                Krow = self.K[s * q + t]
                acc = ring.zero()
                for idx, entry in enumerate(flat):
                    w = Krow[idx]
                    if entry.is_zero() or F.is_zero(w):
                        continue
                    acc = acc + entry.scale(w)
                row.append(acc)
            rows.append(row)
        return SeriesMatrix(ring, rows)


def cohn_sylvester_solve(A, B, C, F, euclid=None):
    """Solve ``A M - M B = C`` for constant A (p x p), B (q x q).

    ``C`` is either a constant p x q matrix or a :class:`SeriesMatrix`; the
    solve then acts on every monomial coefficient.
    Raises :class:`NotCoprime` when the characteristic polynomials share a root.
    """
    op = CohnOperator(A, B, F, euclid)
    if isinstance(C, SeriesMatrix):
        return op.apply(C)
    return op.apply_const(C)


def dense_sylvester_solve(A, B, C, F) -> list[list]:
    """Solve ``A M - M B = C`` through the (pq) x (pq) Kronecker system."""
    p, q = len(A), len(B)
    n = p * q
    L = [[F.zero] * n for _ in range(n)]
    for s in range(p):
        for t in range(q):
            row = s * q + t
            for a in range(p):
                L[row][a * q + t] = L[row][a * q + t] + A[s][a]
            for b in range(q):
                L[row][s * q + b] = L[row][s * q + b] - B[b][t]
    rhs = [C[s][t] for s in range(p) for t in range(q)]
    x = linalg.solve(L, rhs, F)
    return [[x[s * q + t] for t in range(q)] for s in range(p)]


# ---------------------------------------------------------------------------
# constant splitting
# ---------------------------------------------------------------------------

@dataclass
class SplitCertificate:
    """Constant block split of a normal matrix.

    ``Q0^* A0 Q0 = diag(B1, B2)`` with coprime characteristic polynomials
    ``P1``, ``P2`` and ``U P1 + V P2 = 1`` (``euclid = (U, V)``).
    """

    sizes: tuple
    Q0: list
    B1: list
    B2: list
    eigenvalue: object
    P1: list
    P2: list
    euclid: tuple

    def verify(self, A0, F) -> bool:
        d1, d2 = self.sizes
        d = d1 + d2
        Q0h = linalg.adjoint(self.Q0, F)
        scale = max(1.0, max(F.magnitude(a) for row in A0 for a in row))
        ok = linalg.is_zero_matrix(linalg.msub(linalg.mmul(Q0h, self.Q0, F), linalg.eye(d, F)), F)
        T = linalg.mmul(linalg.mmul(Q0h, A0, F), self.Q0, F)
        ok = ok and linalg.is_zero_matrix(linalg.block(T, range(d1), range(d1, d)), F, scale * 16)
        ok = ok and linalg.is_zero_matrix(linalg.block(T, range(d1, d), range(d1)), F, scale * 16)
        U, V = self.euclid
        one = linalg.padd(linalg.pmul(U, self.P1, F), linalg.pmul(V, self.P2, F), F)
        ok = ok and len(one) == 1 and F.is_zero(one[0] - F.one, scale * 16)
        return ok


def unitary_with_first_column(y, F) -> list[list]:
    """A unitary matrix whose first column is the unit vector ``y``.

    It is the identity on the complement of span(e1, y) and a 2 x 2 rotation
    on that plane; no square roots are needed.
    """
    d = len(y)
    U = linalg.eye(d, F)
    y1 = y[0]
    w = [F.zero] + list(y[1:])
    s2 = linalg.norm2(w, F)
    U[0][0] = y1
    for i in range(1, d):
        U[i][0] = w[i]
    if F.is_zero(s2):
        return U
    c = (F.conj(y1) - F.one) * (1 / s2 if not F.exact else QI2.coerce(s2).inverse())
    for i in range(1, d):
        U[0][i] = -F.conj(w[i])
        for j in range(1, d):
            U[i][j] = U[i][j] + c * w[i] * F.conj(w[j])
    return U


def _phase_normalized(v, F):
    """``v`` scaled to a unit vector over Q(i, sqrt2), or None.

    Preference order keeps later deflations in the smallest field: a
    rational normalization with real positive pivot, a real normalization of
    a real vector, a Gaussian norm preimage, then anything in Q(i, sqrt2).
    """
    r = linalg.norm2(v, F)
    if F.is_zero(r):
        return None
    piv = next(i for i, a in enumerate(v) if not F.is_zero(a))
    vp = v[piv]
    t = F.abs2(vp) * r
    root = q2_sqrt(t.a, t.b)
    if root is not None and root[1] == 0:
        return [a * (F.conj(vp) * QI2(root[0]).inverse()) for a in v]
    if all(a.is_real() for a in v):
        rr = q2_sqrt(r.a, r.b)
        if rr is not None:
            f = QI2(rr[0], rr[1]).inverse()
            return [a * f for a in v]
    if r.b == 0:
        z = F.norm_preimage(r) if q2_sqrt(r.a, 0) is None else None
        if z is not None and z.b == 0 and z.d == 0:
            zi = z.inverse()
            return [a * zi for a in v]
    if root is not None:
        f = F.conj(vp) * QI2(root[0], root[1]).inverse()
        return [a * f for a in v]
    hints = [p for a in v for p in (a.real, a.imag) if p]
    z = F.norm_preimage(r, hints)
    if z is None:
        return None
    zi = z.inverse()
    return [a * zi for a in v]


_COMBO_COEFFS = (1, -1, 2, -2, 3)


def _find_unit_vector(basis, F, tries: int = 400):
    """A unit vector in the span of ``basis`` with entries in the exact field.

    Basis vectors are tried first, then a deterministic pseudo-random run of
    small Gaussian integer combinations.
    """
    import random

    for v in basis:
        y = _phase_normalized(v, F)
        if y is not None:
            return y
    m = len(basis)
    if m > 1:
        rng = random.Random(m * 7919 + len(basis[0]))
        for _ in range(tries):
            coeffs = [QI2(rng.choice(_COMBO_COEFFS + (0,)), 0, rng.choice((0, 0, 1, -1)), 0)
                      for _ in range(m)]
            if all(not c for c in coeffs):
                continue
            v = [sum((c * b[k] for c, b in zip(coeffs, basis)), F.zero)
                 for k in range(len(basis[0]))]
            y = _phase_normalized(v, F)
            if y is not None:
                return y
    return None


def _cluster_order(values, mults, F) -> list[int]:
    """Eigenvalue indices, farthest from the spectral mean first.

    Ties go to the larger real part, then the larger imaginary part.
    """
    total = sum(mults)
    cs = [complex(F.to_mpc(v)) for v in values]
    mean = sum(c * m for c, m in zip(cs, mults)) / total
    keys = [(round(abs(c - mean), 9), round(c.real, 9), round(c.imag, 9)) for c in cs]
    return sorted(range(len(cs)), key=lambda i: keys[i], reverse=True)


def _choose_cluster(values, mults, F) -> int:
    """Index of the eigenvalue farthest from the spectral mean."""
    return _cluster_order(values, mults, F)[0]


def _deflate(A0, lam, mult, F):
    """Unitary Q with Q^* A0 Q = diag(lam I, rest), or None if no unit vector is found."""
    d = len(A0)
    Q = linalg.eye(d, F)
    M = [list(r) for r in A0]
    for j in range(mult):
        size = d - j
        shifted = [[M[r][c] - (lam if r == c else F.zero) for c in range(size)]
                   for r in range(size)]
        basis = linalg.nullspace(shifted, F)
        if not basis:
            raise SpectrumNotSplit("eigenspace collapsed during deflation")
        y = _find_unit_vector(basis, F)
        if y is None:
            return None
        W = unitary_with_first_column(y, F)
        T = linalg.mmul(linalg.mmul(linalg.adjoint(W, F), M, F), W, F)
        M = [row[1:] for row in T[1:]]
        full = linalg.eye(d, F)
        for r in range(size):
            for c in range(size):
                full[j + r][j + c] = W[r][c]
        Q = linalg.mmul(Q, full, F)
    return Q, M


def _eigenspace_basis(A0, lam, F):
    """Orthonormal basis of ker(A0 - lam) over the exact field, or None."""
    d = len(A0)
    shifted = [[A0[r][c] - (lam if r == c else F.zero) for c in range(d)] for r in range(d)]
    basis = linalg.nullspace(shifted, F)
    ortho: list[list] = []
    for _ in range(len(basis)):
        cands = []
        for v in basis:
            w = list(v)
            for o in ortho:
                c = linalg.inner(o, w, F)
                w = [a - c * b for a, b in zip(w, o)]
            if not all(F.is_zero(a) for a in w):
                cands.append(w)
        y = _find_unit_vector(cands, F) if cands else None
        if y is None:
            return None
        ortho.append(y)
    return ortho


def _exact_split(A0, F) -> SplitCertificate:
    eig = linalg.exact_eigenvalues(A0, F)
    if len(eig) < 2:
        raise SingleEigenvalue("constant part has a single eigenvalue")
    d = len(A0)
    order = _cluster_order([lam for lam, _ in eig], [m for _, m in eig], F)
    # Preferred route: an orthonormal eigenbasis computed in the given
    # coordinates, so the second block comes out diagonal and deeper levels
    # stay small.
    bases = [_eigenspace_basis(A0, lam, F) for lam, _ in eig]
    if all(b is not None for b in bases):
        first = order[0]
        cols = bases[first] + [v for k, b in enumerate(bases) if k != first for v in b]
        Q = [[cols[c][r] for c in range(d)] for r in range(d)]
        lam, mult = eig[first]
        T = linalg.mmul(linalg.mmul(linalg.adjoint(Q, F), A0, F), Q, F)
        B1 = [[lam if r == c else F.zero for c in range(mult)] for r in range(mult)]
        B2 = linalg.block(T, range(mult, d), range(mult, d))
        return _finish(Q, B1, B2, lam, F)
    # Fallback: deflate one unit eigenvector at a time; clusters are tried in
    # heuristic order until one admits unit eigenvectors.
    for idx in order:
        lam, mult = eig[idx]
        out = _deflate(A0, lam, mult, F)
        if out is None:
            continue
        Q, M = out
        B1 = [[lam if r == c else F.zero for c in range(mult)] for r in range(mult)]
        return _finish(Q, B1, M, lam, F)
    raise SpectrumNotSplit("no eigenspace has a unit vector over Q(i, sqrt2)")


def _finish(Q, B1, B2, lam, F) -> SplitCertificate:
    P1, P2 = linalg.charpoly(B1, F), linalg.charpoly(B2, F)
    try:
        euclid = linalg.extended_euclid(P1, P2, F)
    except NotCoprime as exc:
        raise SpectrumNotSplit(f"blocks are not spectrally disjoint: {exc}") from exc
    return SplitCertificate((len(B1), len(B2)), Q, B1, B2, lam, P1, P2, euclid)


def _mpf_from_gmpy(r):
    if not r:
        return mpmath.mpf(0)
    man, exp = r.as_mantissa_exp()
    return mpmath.mpf((int(man), int(exp)))


def _gmpy_from_mpf(r):
    sign, man, exp, _ = r._mpf_
    if not man:
        return gmpy2.mpfr(0)
    out = gmpy2.mul_2exp(gmpy2.mpfr(int(man)), int(exp))
    return -out if sign else out


def _to_mp(x):
    x = gmpy2.mpc(x)
    return mpmath.mpc(_mpf_from_gmpy(x.real), _mpf_from_gmpy(x.imag))


def _from_mp(z):
    z = mpmath.mpc(z)
    return gmpy2.mpc(_gmpy_from_mpf(z.real), _gmpy_from_mpf(z.imag))


def _float_split(A0, F) -> SplitCertificate:
    d = len(A0)
    scale = max(1.0, max(F.magnitude(a) for row in A0 for a in row))
    with mpmath.workprec(F.prec):
        Am = mpmath.matrix([[_to_mp(a) for a in row] for row in A0])
        Q, T = mpmath.schur(Am)
        vals = [_from_mp(T[i, i]) for i in range(d)]
        Qg = [[_from_mp(Q[i, j]) for j in range(d)] for i in range(d)]
    tol = gmpy2.sqrt(F.eps) * scale
    clusters: list[list[int]] = []
    for i, v in enumerate(vals):
        for cl in clusters:
            if abs(vals[cl[0]] - v) <= tol:
                cl.append(i)
                break
        else:
            clusters.append([i])
    if len(clusters) < 2:
        raise SingleEigenvalue("constant part has a single eigenvalue")
    reps = [sum((vals[i] for i in cl), gmpy2.mpc(0)) / len(cl) for cl in clusters]
    pick = _choose_cluster(reps, [len(cl) for cl in clusters], F)
    order = clusters[pick] + [i for k, cl in enumerate(clusters) if k != pick for i in cl]
    Q0 = [[Qg[r][c] for c in order] for r in range(d)]
    T0 = linalg.mmul(linalg.mmul(linalg.adjoint(Q0, F), A0, F), Q0, F)
    m = len(clusters[pick])
    B1 = linalg.block(T0, range(m), range(m))
    B2 = linalg.block(T0, range(m, d), range(m, d))
    return _finish(Q0, B1, B2, reps[pick], F)


def constant_normal_split(A0, F) -> SplitCertificate:
    """Split a constant normal matrix into two spectrally disjoint blocks.

    The eigenvalue farthest from the spectral mean forms the first block.
    Exact matrices must have their spectrum and unit eigenvectors in
    Q(i, sqrt2) (else :class:`SpectrumNotSplit`); float matrices use a Schur
    decomposition at the working precision.
    """
    if F.exact:
        return _exact_split(A0, F)
    return _float_split(A0, F)


# ---------------------------------------------------------------------------
# Hensel lifting
# ---------------------------------------------------------------------------

@dataclass
class SkewCorrection:
    """Degree-k correction: off-diagonal block ``x`` and ``u = [[0, x], [-x^*, 0]]``."""

    degree: int
    x: SeriesMatrix
    u: SeriesMatrix


@dataclass
class HenselResult:
    U: SeriesMatrix
    B1: SeriesMatrix
    B2: SeriesMatrix
    corrections: list = field(default_factory=list)


def cayley_minus_identity(u: SeriesMatrix) -> SeriesMatrix:
    """(I - u/2)^(-1) (I + u/2) - I = 2 * sum_{j>=1} (u/2)^j for u of positive order."""
    ring = u.ring
    h = u.scale(Fraction(1, 2))
    S = h
    P = h
    while True:
        P = matmul(P, h)
        if P.is_zero():
            break
        S = S + P
    return S.scale(2)


def _assemble_skew(x: SeriesMatrix, d1: int, d2: int) -> SeriesMatrix:
    ring = x.ring
    z = ring.zero()
    xh = adjoint(x)
    rows = []
    for i in range(d1):
        rows.append([z] * d1 + list(x.entries[i]))
    for i in range(d2):
        rows.append([-s for s in xh.entries[i]] + [z] * d2)
    return SeriesMatrix(ring, rows)


def _negligible(M: SeriesMatrix, tol) -> bool:
    if M.ring.exact:
        return M.is_zero()
    return M.max_abs_mp() <= tol


def hensel_split(A: SeriesMatrix, cert: SplitCertificate, locus: str | None = None) -> HenselResult:
    """Unitary U with U(0) = I and U^* A U block diagonal modulo the reliable degree.

    ``A(0)`` must already be ``diag(cert.B1, cert.B2)``.  At each degree k the
    degree-k part C of the upper right block is removed by solving
    ``B1 x - x B2 = -C`` and conjugating by the Cayley factor of
    ``u = [[0, x], [-x^*, 0]]``; normality then forces the lower left block to
    vanish in degree k as well, which is asserted.
    """
    d1, d2 = cert.sizes
    d = d1 + d2
    ring = A.ring
    F = ring.field
    op = CohnOperator(cert.B1, cert.B2, F, cert.euclid)
    rel = A.rel
    top, bottom = range(d1), range(d1, d)
    Cur = A
    U = SeriesMatrix.identity(ring, d)
    tol = None
    if not F.exact:
        tol = F.eps * max(gmpy2.mpfr(1), A.max_abs_mp()) * 64
    corrections = []
    for k in range(1, rel + 1):
        C = Cur.block(top, bottom).homogeneous(k)
        if not _negligible(C, tol):
            x = op.apply(-C)
            u = _assemble_skew(x, d1, d2)
            corrections.append(SkewCorrection(k, x, u))
            V = cayley_minus_identity(u)
            T = matmul(Cur, V, limit=rel)
            Cur = Cur + T + matmul(adjoint(V), Cur + T, limit=rel)
            U = U + matmul(U, V)
        E = Cur.block(bottom, top).homogeneous(k)
        if not _negligible(E, tol):
            raise NormalityViolation(
                f"lower left block survives in degree {k}; input is not normal", locus)
        if log.isEnabledFor(logging.DEBUG):
            log.debug("hensel degree %d: residual %.3g", k,
                      Cur.block(top, bottom).homogeneous(k).max_abs())
    B1 = Cur.block(top, top)
    B2 = Cur.block(bottom, bottom)
    return HenselResult(U, B1, B2, corrections)

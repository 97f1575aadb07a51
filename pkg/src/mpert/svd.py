"""Singular value decomposition of rectangular series matrices.

A* A and A A* are diagonalized separately, the eigenvector bases are
ordered so equal eigenvalue series sit together, and each square block
A_lam of ``V0^* A U0`` (normal with A_lam^* A_lam = lam I) is diagonalized
on its own.  :func:`svd_monomial_refine` then turns the diagonal entries into
real monomial-times-unit series.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2

from mpert.diagonalize import (
    ResidualReport,
    canonical_key,
    diagonalize_normal,
    realify,
    well_ordered_check,
)
from mpert.discriminants import hypothesis_check
from mpert.errors import (
    BlockHypothesisViolated,
    HypothesisError,
    HypothesisViolated,
    NotASquareInField,
    NotMonomialUnit,
    NotReal,
    RefinementHypothesisViolated,
)
from mpert.matrix import SeriesMatrix, adjoint, char_poly, matmul
from mpert.series import (
    Series,
    invert_unit,
    is_monomial_times_unit,
    monomial_content,
    sqrt_unit,
)

MODES = ("complex-diagonal", "real-block", "real-diagonal-refined")


@dataclass
class SVDResult:
    """``V^-1 A U = D`` with ``D`` rectangular diagonal (or 2x2 blocks in real mode).

    ``entries`` lists the diagonal in order: a :class:`Series` per 1x1 entry
    and an ``(a, b)`` pair per block [[a, b], [-b, a]].
    """

    V: SeriesMatrix
    U: SeriesMatrix
    D: SeriesMatrix
    entries: list
    mode: str
    reliable_degree: int
    A: SeriesMatrix | None = None
    residual: ResidualReport | None = None
    well_ordered: bool | None = None
    exponents: list = field(default_factory=list)
    real: bool = False


def _adj(M: SeriesMatrix, real: bool) -> SeriesMatrix:
    return M.transpose() if real else adjoint(M)


def _entries_to_matrix(ring, m: int, d: int, entries) -> SeriesMatrix:
    z = ring.zero()
    rows = [[z] * d for _ in range(m)]
    pos = 0
    for e in entries:
        if isinstance(e, tuple):
            a, b = e
            rows[pos][pos], rows[pos][pos + 1] = a, b
            rows[pos + 1][pos], rows[pos + 1][pos + 1] = -b, a
            pos += 2
        else:
            rows[pos][pos] = e
            pos += 1
    return SeriesMatrix(ring, rows)


def _tol(D) -> float:
    return 2.0 ** -64 * max([1.0] + [s.max_abs() for s in D])


def _same(a: Series, b: Series, tol) -> bool:
    if a.exact:
        return a.equal_mod(b)
    return (a - b).truncate(min(a.rel, b.rel)).max_abs() <= tol


def _is_zero_series(a: Series, tol) -> bool:
    if a.exact:
        return a.is_zero()
    return a.max_abs() <= tol


def _classes(D, tol):
    """Group indices of equal eigenvalue series; zero entries are returned apart."""
    groups: list[list[int]] = []
    zeros: list[int] = []
    for i, s in enumerate(D):
        if _is_zero_series(s, tol):
            zeros.append(i)
            continue
        for g in groups:
            if _same(D[g[0]], s, tol):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups, zeros


def _permute_columns(U: SeriesMatrix, order) -> SeriesMatrix:
    return SeriesMatrix(U.ring, [[row[j] for j in order] for row in U.entries])


def _block_diag_many(ring, blocks, size: int) -> SeriesMatrix:
    z, o = ring.zero(), ring.one()
    rows = [[o if i == j else z for j in range(size)] for i in range(size)]
    pos = 0
    for B in blocks:
        for i in range(B.rows):
            for j in range(B.cols):
                rows[pos + i][pos + j] = B.entries[i][j]
        pos += B.rows
    return SeriesMatrix(ring, rows)


def _eig(M: SeriesMatrix, real: bool):
    if real:
        rf = realify(M)
        if rf.s:
            raise HypothesisViolated("symmetric Gram matrix produced rotation blocks")
        return rf.O, list(rf.blocks)
    res = diagonalize_normal(M, with_residual=False)
    return res.U, list(res.D)


def _offblock_degree(Ahat: SeriesMatrix, sizes, N: int) -> int:
    """Largest degree through which the entries outside the diagonal blocks vanish.

    Those entries are exactly the residual V^* A U - D, so this is the
    reliable degree of the decomposition.
    """
    owner_r = [None] * Ahat.rows
    owner_c = [None] * Ahat.cols
    pos = 0
    for k, size in enumerate(sizes):
        for i in range(pos, pos + size):
            owner_r[i] = owner_c[i] = k
        pos += size
    F = Ahat.ring.field
    tol = None if F.exact else F.eps * max(gmpy2.mpfr(1), Ahat.max_abs_mp()) * 2 ** 20
    rel = N
    for i, row in enumerate(Ahat.entries):
        for j, s in enumerate(row):
            if owner_r[i] is not None and owner_r[i] == owner_c[j]:
                continue
            rel = min(rel, s.rel)
            for e, c in s.terms.items():
                if tol is None or abs(c) > tol:
                    rel = min(rel, sum(e) - 1)
                    break
    return max(rel, -1)


def svd_residual(A: SeriesMatrix, res: SVDResult) -> ResidualReport:
    real = res.real
    deg = res.reliable_degree
    R = matmul(matmul(_adj(res.V, real), A), res.U) - res.D
    Iv = SeriesMatrix.identity(A.ring, res.V.rows)
    Iu = SeriesMatrix.identity(A.ring, res.U.rows)
    EV = matmul(res.V, _adj(res.V, real)) - Iv
    EU = matmul(res.U, _adj(res.U, real)) - Iu
    return ResidualReport(
        conjugation=R.truncate(deg).max_abs(),
        unitarity=max(EV.truncate(deg).max_abs(), EU.truncate(deg).max_abs()),
        degree=deg,
    )


def svd_series(A: SeriesMatrix, real: bool = False, hypothesis_gate: bool = True) -> SVDResult:
    """Unitary V (m x m) and U (d x d) with V^-1 A U diagonal modulo the reliable degree.

    ``real=True`` requires real entries and returns orthogonal V, U with 2x2
    rotation blocks where needed.  Inputs with more rows than columns are
    handled through the (conjugate) transpose.
    """
    ring = A.ring
    if real and not A.is_real():
        raise NotReal("real mode expects real series entries")
    m, d = A.shape
    if m > d:
        t = svd_series(_adj(A, real), real=real, hypothesis_gate=hypothesis_gate)
        entries = []
        for e in t.entries:
            if isinstance(e, tuple):
                entries.append((e[0], -e[1]))
            else:
                entries.append(e if real else e.conj())
        out = SVDResult(V=t.U, U=t.V, D=_entries_to_matrix(ring, m, d, entries),
                        entries=entries, mode=t.mode, reliable_degree=t.reliable_degree, A=A,
                        real=real)
        out.residual = svd_residual(A, out)
        return out
    Ah = _adj(A, real)
    AhA = matmul(Ah, A)
    AAh = matmul(A, Ah)
    if hypothesis_gate:
        rep = hypothesis_check(AhA)
        if not rep.monomial_unit:
            raise HypothesisViolated(
                "discriminant of A*A is not a monomial times a unit", "svd")
    U1, D1 = _eig(AhA, real)
    U2, D2 = _eig(AAh, real)
    tol = _tol(D1 + D2)
    g1, z1 = _classes(D1, tol)
    g2, z2 = _classes(D2, tol)
    # eigenvalue correspondence between A*A and AA*
    pairs = []
    left = list(g2)
    for g in g1:
        match = next((h for h in left if _same(D1[g[0]], D2[h[0]], tol)), None)
        if match is None or len(match) != len(g):
            raise HypothesisViolated(
                f"eigenvalue {D1[g[0]]} of A*A has no matching eigenvalue of AA*", "svd")
        left.remove(match)
        pairs.append((g, match))
    if left:
        raise HypothesisViolated("AA* has eigenvalues missing from A*A", "svd")
    pairs.sort(key=lambda p: canonical_key(D1[p[0][0]]))
    order1 = [i for g, _ in pairs for i in g] + z1
    order2 = [i for _, h in pairs for i in h] + z2
    U1p = _permute_columns(U1, order1)
    U2p = _permute_columns(U2, order2)
    lam = [D1[g[0]] for g, _ in pairs]
    Ahat = matmul(matmul(_adj(U2p, real), A), U1p)
    rel = _offblock_degree(Ahat, [len(g) for g, _ in pairs],
                           min(ring.cap, A.rel, U1p.rel, U2p.rel))
    blocks = []
    entries = []
    pos = 0
    for k, ((g, _), lv) in enumerate(zip(pairs, lam)):
        size = len(g)
        Al = Ahat.block(range(pos, pos + size), range(pos, pos + size)).truncate(rel)
        Al = SeriesMatrix(ring, [[s.with_rel(min(s.rel, rel)) for s in r] for r in Al.entries])
        locus = f"svd.block{k + 1}"
        _check_block(Al, lv, real, rel, locus)
        if size == 1:
            blocks.append(SeriesMatrix.identity(ring, 1))
            entries.append(Al.entries[0][0])
        else:
            try:
                if real:
                    rf = realify(Al)
                    blocks.append(rf.O)
                    entries.extend(rf.blocks)
                else:
                    r = diagonalize_normal(Al, with_residual=False)
                    blocks.append(r.U)
                    entries.extend(r.D)
            except HypothesisError as exc:
                raise BlockHypothesisViolated(
                    f"block for eigenvalue {lv} could not be diagonalized: {Exception.__str__(exc)}",
                    locus) from exc
        pos += size
    W2 = _block_diag_many(ring, blocks, m)
    W1 = _block_diag_many(ring, blocks, d)
    V = matmul(U2p, W2)
    U = matmul(U1p, W1)
    entries.extend([ring.zero()] * (m - pos))
    mode = "real-block" if real else "complex-diagonal"
    out = SVDResult(V=V, U=U, D=_entries_to_matrix(ring, m, d, entries), entries=entries,
                    mode=mode, reliable_degree=rel, A=A, real=real)
    out.residual = svd_residual(A, out)
    return out


def _check_block(Al: SeriesMatrix, lv: Series, real: bool, rel: int, locus: str):
    ring = Al.ring
    k = Al.rows
    target = SeriesMatrix.diag(ring, [lv.with_rel(min(lv.rel, rel))] * k)
    Ah = _adj(Al, real)
    for M in (matmul(Ah, Al), matmul(Al, Ah)):
        E = (M - target).truncate(rel)
        if ring.exact:
            bad = not E.is_zero()
        else:
            bad = E.max_abs() > 2.0 ** -64 * max(1.0, target.max_abs())
        if bad:
            raise BlockHypothesisViolated(
                "diagonal block does not satisfy A_lam^* A_lam = lam I", locus)


def _joint_content(*series: Series):
    gamma = None
    for s in series:
        if s.is_zero():
            continue
        g = monomial_content(s)
        gamma = g if gamma is None else tuple(min(a, b) for a, b in zip(gamma, g))
    return gamma


def _unit_sqrt(s: Series, locus: str) -> Series:
    if s.exact:
        c0 = s.constant()
        if not c0:
            raise RefinementHypothesisViolated(
                "sum of squares is not a monomial times a unit", locus)
    elif abs(s.constant()) <= s.ring.field.eps * max(1.0, s.max_abs()) * 64:
        raise RefinementHypothesisViolated("sum of squares is not a monomial times a unit", locus)
    return sqrt_unit(s)


def svd_monomial_refine(res: SVDResult) -> SVDResult:
    """Make every diagonal entry a real series X^gamma * h with h(0) > 0.

    Complex entries a = X^gamma (a1 + i a2) are multiplied by the unit
    (a1 - i a2) / (a1^2 + a2^2)^(1/2); real 2x2 blocks are rotated by
    [[a0, -b0], [b0, a0]] / (a0^2 + b0^2)^(1/2).  Raises
    :class:`RefinementHypothesisViolated` when a sum of squares is not a
    monomial times a unit.
    """
    A = res.A
    ring = res.U.ring
    if A is not None and A.rows and A.cols:
        Ah = _adj(A, res.real)
        small = matmul(A, Ah) if A.rows <= A.cols else matmul(Ah, A)
        P = char_poly(small)
        last = P.last_nonzero()
        if last is not None and not is_monomial_times_unit(last[1])[0]:
            raise RefinementHypothesisViolated(
                "last nonzero coefficient of the characteristic polynomial of A*A "
                "is not a monomial times a unit", "refine")
    d = res.U.rows
    Ucols = [[res.U.entries[i][j] for i in range(d)] for j in range(d)]
    new_entries = []
    pos = 0
    for idx, e in enumerate(res.entries):
        locus = f"refine.entry{idx + 1}"
        if isinstance(e, tuple):
            a, b = e
            gamma = _joint_content(a, b)
            if gamma is None:
                new_entries.extend([ring.zero(), ring.zero()])
                pos += 2
                continue
            a0, b0 = a.div_monomial(gamma), b.div_monomial(gamma)
            h = _unit_sqrt(a0 * a0 + b0 * b0, locus)
            hi = invert_unit(h)
            r00, r01, r10, r11 = a0 * hi, -(b0 * hi), b0 * hi, a0 * hi
            c0, c1 = Ucols[pos], Ucols[pos + 1]
            Ucols[pos] = [x * r00 + y * r10 for x, y in zip(c0, c1)]
            Ucols[pos + 1] = [x * r01 + y * r11 for x, y in zip(c0, c1)]
            val = h.mul_monomial(gamma)
            new_entries.extend([val, val])
            pos += 2
            continue
        if e.is_zero():
            new_entries.append(e)
            pos += 1
            continue
        a1, a2 = e.real_part(), e.imag_part()
        gamma = _joint_content(a1, a2)
        at = e.div_monomial(gamma)
        if at.is_real():
            h = at
            if ring.field.real_sign(h.constant()) == 0:
                raise RefinementHypothesisViolated("entry is not a monomial times a unit", locus)
            sign = ring.field.real_sign(h.constant())
            u = ring.constant(sign)
            h = h.scale(sign)
        else:
            h = _unit_sqrt((at * at.conj()).real_part(), locus)
            u = at.conj() * invert_unit(h)
        if pos < d:
            Ucols[pos] = [x * u for x in Ucols[pos]]
        new_entries.append(h.mul_monomial(gamma))
        pos += 1
    U = SeriesMatrix(ring, [[Ucols[j][i] for j in range(d)] for i in range(d)])
    m = res.V.rows
    D = SeriesMatrix(ring, [[new_entries[i] if i == j and i < len(new_entries) else ring.zero()
                             for j in range(d)] for i in range(m)])
    exps = []
    for s in new_entries:
        if s.is_zero():
            continue
        flag, g = is_monomial_times_unit(s)
        if not flag:
            raise RefinementHypothesisViolated(f"refined entry {s} is not a monomial times a unit")
        exps.append(g)
    try:
        ordered = well_ordered_check(new_entries)
    except NotMonomialUnit as exc:
        raise RefinementHypothesisViolated(str(exc)) from exc
    rel = min([res.reliable_degree, U.rel] + [s.rel for s in new_entries])
    out = SVDResult(V=res.V, U=U, D=D, entries=new_entries, mode="real-diagonal-refined",
                    reliable_degree=rel, A=A, well_ordered=ordered, exponents=exps,
                    real=res.real)
    if A is not None:
        out.residual = svd_residual(A, out)
    return out

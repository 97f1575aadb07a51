"""Constant matrices and univariate polynomials over a coefficient field.

Matrices are lists of rows; polynomials are coefficient lists in increasing
degree.  Every function takes the field object ``F`` so that the same code
serves the exact and the float backend.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath

from mpert.errors import NotCoprime, SpectrumNotSplit
from mpert.scalar import QI2


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def zeros(p: int, q: int, F) -> list[list]:
    return [[F.zero for _ in range(q)] for _ in range(p)]


def eye(d: int, F) -> list[list]:
    out = zeros(d, d, F)
    for i in range(d):
        out[i][i] = F.one
    return out


def mmul(A, B, F) -> list[list]:
    p, r = len(A), len(B)
    q = len(B[0]) if B else 0
    out = zeros(p, q, F)
    for i in range(p):
        Ai = A[i]
        for j in range(q):
            s = F.zero
            for k in range(r):
                s = s + Ai[k] * B[k][j]
            out[i][j] = s
    return out


def madd(A, B) -> list[list]:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def msub(A, B) -> list[list]:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mscale(A, c) -> list[list]:
    return [[c * a for a in row] for row in A]


def adjoint(A, F) -> list[list]:
    p = len(A)
    q = len(A[0]) if A else 0
    return [[F.conj(A[i][j]) for i in range(p)] for j in range(q)]


def trace(A, F):
    s = F.zero
    for i in range(len(A)):
        s = s + A[i][i]
    return s


def is_zero_matrix(A, F, scale=None) -> bool:
    return all(F.is_zero(a, scale) for row in A for a in row)


def block(A, rows: range, cols: range) -> list[list]:
    return [[A[i][j] for j in cols] for i in rows]


def column(A, j: int) -> list:
    return [row[j] for row in A]


def inner(u, v, F):
    """Hermitian inner product <u, v> = sum conj(u_k) v_k."""
    s = F.zero
    for a, b in zip(u, v):
        s = s + F.conj(a) * b
    return s


def norm2(v, F):
    s = F.zero
    for a in v:
        s = s + F.abs2(a)
    return s


def _pivot(col_vals, F):
    """Index of the pivot among (index, value) pairs: first nonzero (exact) or largest (float)."""
    best = None
    for idx, v in col_vals:
        if F.is_zero(v):
            continue
        if F.exact:
            return idx
        if best is None or abs(v) > best[1]:
            best = (idx, abs(v))
    return None if best is None else best[0]


def rref(A, F) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = [list(r) for r in A]
    p = len(M)
    q = len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(q):
        if r >= p:
            break
        piv = _pivot([(i, M[i][c]) for i in range(r, p)], F)
        if piv is None:
            for i in range(r, p):
                M[i][c] = F.zero
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = _inv(M[r][c], F)
        M[r] = [x * inv for x in M[r]]
        for i in range(p):
            if i != r and not F.is_zero(M[i][c]):
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M, pivots


def _inv(x, F):
    if F.exact:
        return QI2.coerce(x).inverse()
    return 1 / x


def nullspace(A, F) -> list[list]:
    """Basis of {v : A v = 0}."""
    q = len(A[0]) if A else 0
    R, pivots = rref(A, F)
    free = [c for c in range(q) if c not in pivots]
    basis = []
    for f in free:
        v = [F.zero] * q
        v[f] = F.one
        for r, c in enumerate(pivots):
            v[c] = -R[r][f]
        basis.append(v)
    return basis


def solve(A, b, F) -> list:
    """Solve the square nonsingular system A x = b."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = rref(aug, F)
    if pivots != list(range(n)):
        raise NotCoprime("singular linear system")
    return [R[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def ptrim(p, F) -> list:
    p = list(p)
    while p and F.is_zero(p[-1]):
        p.pop()
    return p


def pdeg(p) -> int:
    return len(p) - 1


def padd(p, q, F) -> list:
    n = max(len(p), len(q))
    out = [(p[i] if i < len(p) else F.zero) + (q[i] if i < len(q) else F.zero)
           for i in range(n)]
    return ptrim(out, F)


def psub(p, q, F) -> list:
    return padd(p, [-c for c in q], F)


def pmul(p, q, F) -> list:
    if not p or not q:
        return []
    out = [F.zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return ptrim(out, F)


def pscale(p, c, F) -> list:
    return ptrim([c * a for a in p], F)


def pdivmod(a, b, F) -> tuple[list, list]:
    b = ptrim(b, F)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = ptrim(a, F)
    q = [F.zero] * max(0, len(a) - len(b) + 1)
    inv_lead = _inv(b[-1], F)
    r = list(a)
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] * inv_lead
        q[shift] = c
        for i, bc in enumerate(b):
            r[i + shift] = r[i + shift] - c * bc
        r.pop()
        r = ptrim(r, F)
    return ptrim(q, F), r


def pmonic(p, F) -> list:
    p = ptrim(p, F)
    if not p:
        return p
    inv = _inv(p[-1], F)
    return [c * inv for c in p]


def pderiv(p, F) -> list:
    return ptrim([p[i] * i for i in range(1, len(p))], F)


def pgcd(a, b, F) -> list:
    a, b = ptrim(a, F), ptrim(b, F)
    while b:
        _, r = pdivmod(a, b, F)
        a, b = b, r
    return pmonic(a, F)


def peval(p, x, F):
    s = F.zero
    for c in reversed(p):
        s = s * x + c
    return s


def peval_matrix(p, A, F) -> list[list]:
    d = len(A)
    out = zeros(d, d, F)
    for c in reversed(p):
        out = mmul(out, A, F)
        for i in range(d):
            out[i][i] = out[i][i] + c
    return out


def extended_euclid(P, Q, F) -> tuple[list, list]:
    """(U, V) with U*P + V*Q = 1, deg U < deg Q and deg V < deg P.

    Raises :class:`NotCoprime` when gcd(P, Q) is not constant.
    """
    P, Q = ptrim(P, F), ptrim(Q, F)
    if not P or not Q:
        raise NotCoprime("zero polynomial")
    r0, r1 = P, Q
    s0, s1 = [F.one], []
    t0, t1 = [], [F.one]
    while r1:
        q, r = pdivmod(r0, r1, F)
        r0, r1 = r1, r
        s0, s1 = s1, psub(s0, pmul(q, s1, F), F)
        t0, t1 = t1, psub(t0, pmul(q, t1, F), F)
    if len(r0) != 1:
        raise NotCoprime("polynomials share a nonconstant factor")
    inv = _inv(r0[0], F)
    U, V = pscale(s0, inv, F), pscale(t0, inv, F)
    # reduce to the minimal-degree certificate
    if len(U) >= len(Q) and len(Q) > 1:
        k, U = pdivmod(U, Q, F)
        V = padd(V, pmul(k, P, F), F)
    return U, V


def charpoly(A, F) -> list:
    """Monic characteristic polynomial det(Z I - A) by Faddeev-LeVerrier."""
    d = len(A)
    coeffs = [F.one]  # c_0
    M = zeros(d, d, F)
    for k in range(1, d + 1):
        M = mmul(A, M, F)
        for i in range(d):
            M[i][i] = M[i][i] + coeffs[-1]
        AM = mmul(A, M, F)
        ck = trace(AM, F) * (F(Fraction(-1, k)))
        coeffs.append(ck)
    # coeffs[i] multiplies Z^(d-i)
    return list(reversed(coeffs))


# ---------------------------------------------------------------------------
# exact eigenvalues
# ---------------------------------------------------------------------------

def _mp(x: QI2, prec_dps: int):
    with mpmath.workdps(prec_dps):
        r2 = mpmath.sqrt(2)
        return mpmath.mpc(mpmath.mpf(x.a.numerator) / x.a.denominator
                          + mpmath.mpf(x.b.numerator) / x.b.denominator * r2,
                          mpmath.mpf(x.c.numerator) / x.c.denominator
                          + mpmath.mpf(x.d.numerator) / x.d.denominator * r2)


def _identify_q2(x, dps: int) -> tuple[Fraction, Fraction] | None:
    with mpmath.workdps(dps):
        if abs(x) < mpmath.mpf(10) ** (-(dps // 2)):
            return Fraction(0), Fraction(0)
        rel = mpmath.pslq([x, 1, mpmath.sqrt(2)], maxcoeff=10 ** (dps // 4),
                          maxsteps=20000)
    if rel is None or rel[0] == 0:
        return None
    c0, c1, c2 = (int(v) for v in rel)
    return Fraction(-c1, c0), Fraction(-c2, c0)


def _roots_by_pslq(p: list, F) -> list | None:
    size = max(len(str(c.a)) + len(str(c.b)) + len(str(c.c)) + len(str(c.d)) for c in p)
    dps = 60 + 4 * size
    coeffs = [_mp(c, dps) for c in reversed(p)]
    with mpmath.workdps(dps):
        try:
            approx = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * dps)
        except mpmath.libmp.NoConvergence:
            return None
    roots = []
    for z in approx:
        re = _identify_q2(z.real, dps)
        im = _identify_q2(z.imag, dps)
        if re is None or im is None:
            return None
        lam = QI2(re[0], re[1], im[0], im[1])
        if peval(p, lam, F):
            return None
        roots.append(lam)
    return roots


def _roots_by_sympy(p: list) -> list:
    import sympy

    Z = sympy.Symbol("Z")
    s2 = sympy.sqrt(2)

    def conv(c: QI2):
        return (sympy.Rational(c.a.numerator, c.a.denominator)
                + sympy.Rational(c.b.numerator, c.b.denominator) * s2
                + sympy.I * (sympy.Rational(c.c.numerator, c.c.denominator)
                             + sympy.Rational(c.d.numerator, c.d.denominator) * s2))

    expr = sum(conv(c) * Z ** k for k, c in enumerate(p))
    _, factors = sympy.factor_list(sympy.expand(expr), Z, extension=[sympy.I, s2])
    roots = []
    t = sympy.Symbol("t")
    for fac, _mult in factors:
        poly = sympy.Poly(fac, Z)
        if poly.degree() == 0:
            continue
        if poly.degree() != 1:
            raise SpectrumNotSplit(
                "characteristic polynomial does not split over Q(i, sqrt2)")
        a1, a0 = poly.all_coeffs()
        root = sympy.expand(-a0 / a1)
        re, im = root.as_real_imag()
        parts = []
        for part in (sympy.expand(re), sympy.expand(im)):
            q = sympy.Poly(sympy.expand(part.subs(s2, t)), t)
            cs = dict(q.as_dict())
            parts.append((Fraction(str(cs.get((0,), 0))), Fraction(str(cs.get((1,), 0)))))
        roots.append(QI2(parts[0][0], parts[0][1], parts[1][0], parts[1][1]))
    return roots


def exact_eigenvalues(A, F) -> list[tuple[QI2, int]]:
    """Distinct eigenvalues with algebraic multiplicities, exactly.

    Roots of the square-free part of the characteristic polynomial are located
    numerically, identified as elements of Q(i, sqrt2) by integer relation
    detection and verified exactly; a symbolic factorization is the fallback.
    Raises :class:`SpectrumNotSplit` if a root lies outside Q(i, sqrt2).
    """
    P = charpoly(A, F)
    g = pgcd(P, pderiv(P, F), F)
    sqfree, _ = pdivmod(P, g, F)
    sqfree = pmonic(sqfree, F)
    roots = None
    if len(sqfree) == 2:
        roots = [-sqfree[0]]
    elif len(sqfree) > 2:
        roots = _roots_by_pslq(sqfree, F)
        if roots is None or len(set(roots)) != len(sqfree) - 1:
            roots = _roots_by_sympy(sqfree)
    else:
        roots = []
    out = []
    for lam in roots:
        mult = 0
        rest = P
        lin = [-lam, F.one]
        while True:
            q, r = pdivmod(rest, lin, F)
            if r:
                break
            mult += 1
            rest = q
        out.append((lam, mult))
    if sum(m for _, m in out) != len(A):
        raise SpectrumNotSplit("could not account for every eigenvalue")
    return out

"""Random instance builders shared by the tests and the benchmark."""
from __future__ import annotations

import random
from fractions import Fraction

from mpert import linalg
from mpert.errors import NotCoprime
from mpert.matrix import SeriesMatrix, adjoint, matmul
from mpert.scalar import QI2, ExactField
from mpert.series import Series, SeriesRing

F = ExactField()


def rand_q(rng: random.Random, lo: int = -3, hi: int = 3) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, 3))


def rand_gaussian(rng: random.Random) -> QI2:
    return QI2(rand_q(rng), 0, rand_q(rng), 0)


def inverse(M, field=F):
    """Matrix inverse by one linear solve per column; raises NotCoprime if singular."""
    d = len(M)
    I = linalg.eye(d, field)
    cols = [linalg.solve(M, linalg.column(I, j), field) for j in range(d)]
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def cayley_unitary(rng: random.Random, d: int, field=F):
    """(I - S)^-1 (I + S) for a random skew-Hermitian S over Q(i)."""
    S = [[field.zero] * d for _ in range(d)]
    for i in range(d):
        S[i][i] = QI2(0, 0, rand_q(rng), 0)
        for j in range(i + 1, d):
            z = rand_gaussian(rng)
            S[i][j] = z
            S[j][i] = -z.conjugate()
    I = linalg.eye(d, field)
    M = linalg.msub(I, S)
    P = linalg.madd(I, S)
    cols = [linalg.solve(M, [P[i][j] for i in range(d)], field) for j in range(d)]
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def rand_tail(R: SeriesRing, rng: random.Random, terms: int = 3) -> Series:
    """A few random terms of positive degree."""
    s = R.zero()
    for _ in range(terms):
        e = tuple(rng.randint(0, 2) for _ in range(R.nvars))
        if sum(e):
            s = s + R.monomial(e, rand_gaussian(rng))
    return s


def rand_series(R: SeriesRing, rng: random.Random, terms: int = 4, const: bool = True) -> Series:
    s = rand_tail(R, rng, terms)
    if const:
        s = s + R.constant(rand_gaussian(rng))
    return s


def diagonal_family(rng: random.Random, R: SeriesRing, d: int) -> list[Series]:
    """Entries d_i with every d_i and every difference d_i - d_j a monomial times a unit.

    Entries sharing a constant c are c + X^g (l_i + tail_i) with distinct
    nonzero leads l_i, so their differences are X^g times a unit.
    """
    n = R.nvars
    consts = [QI2(rng.randint(-2, 2), 0, rng.randint(-2, 2), 0)
              for _ in range(rng.randint(1, d))]
    groups: dict = {}
    for i in range(d):
        groups.setdefault(rng.choice(consts), []).append(i)
    out: list = [None] * d
    for c, idx in groups.items():
        g = tuple(rng.randint(0, 1) if k else 1 for k in range(n))
        leads = rng.sample(range(1, 8), len(idx))
        for i, e in zip(idx, leads):
            unit = R.constant(QI2(e, 0, rng.choice([0, 1]), 0)) + rand_tail(R, rng)
            if c == QI2(0) or len(idx) > 1:
                out[i] = R.constant(c) + unit.mul_monomial(g)
            else:
                out[i] = R.constant(c) + rand_tail(R, rng)
    return out


def round_trip_instance(rng: random.Random, d: int, n: int, N: int):
    """A = Q0 diag(d_i) Q0^* with Q0 an exact Cayley unitary; returns (A, [d_i], Q0)."""
    R = SeriesRing(n, N)
    ds = diagonal_family(rng, R, d)
    Q = SeriesMatrix.from_constants(R, cayley_unitary(rng, d))
    A = matmul(matmul(Q, SeriesMatrix.diag(R, ds)), adjoint(Q))
    return A, ds, Q


def rational_spectrum_matrix(rng: random.Random, values):
    """P diag(values) P^-1 for a random invertible rational P."""
    d = len(values)
    while True:
        P = [[F(rand_q(rng)) for _ in range(d)] for _ in range(d)]
        try:
            Pinv = inverse(P)
        except NotCoprime:
            continue
        break
    D = [[F(values[i]) if i == j else F.zero for j in range(d)] for i in range(d)]
    return linalg.mmul(linalg.mmul(P, D, F), Pinv, F)


def sylvester_pair(rng: random.Random):
    """Constant (A, B, C) with disjoint rational spectra, sizes <= 4."""
    p, q = rng.randint(1, 4), rng.randint(1, 4)
    pool = rng.sample(range(-6, 7), p + q)
    A = rational_spectrum_matrix(rng, pool[:p])
    B = rational_spectrum_matrix(rng, pool[p:])
    C = [[rand_gaussian(rng) for _ in range(q)] for _ in range(p)]
    return A, B, C


def root_family(rng: random.Random, R: SeriesRing, d: int):
    """Distinct root series with multiplicities summing to d: [(series, mult)]."""
    mults = []
    left = d
    while left:
        m = rng.randint(1, min(left, 3))
        mults.append(m)
        left -= m
    roots = []
    while len(roots) < len(mults):
        s = rand_series(R, rng, terms=3)
        if all(not (s - r).is_zero() for r in roots):
            roots.append(s)
    return list(zip(roots, mults))

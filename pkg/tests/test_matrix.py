from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _generators import rand_series
from mpert.errors import DimensionMismatch, NotSquare
from mpert.matrix import (
    SeriesMatrix,
    adjoint,
    char_poly,
    is_normal,
    is_unitary,
    matmul,
    power_sums,
)
from mpert.scalar import QI2
from mpert.series import SeriesRing

I = QI2(0, 0, 1, 0)


def kp(N=6):
    R = SeriesRing(2, N)
    X1, X2 = R.var(0), R.var(1)
    return R, SeriesMatrix(R, [[X1 * X1, X1 * X2], [X1 * X2, X2 * X2]])


def rand_matrix(R, rng, p, q):
    return SeriesMatrix(R, [[rand_series(R, rng, 3) for _ in range(q)] for _ in range(p)])


# polynomial-in-Z helpers for the cofactor oracle: lists of series, low degree first
def _padd(a, b, R):
    n = max(len(a), len(b))
    return [(a[k] if k < len(a) else R.zero()) + (b[k] if k < len(b) else R.zero())
            for k in range(n)]


def _pmul(a, b, R):
    out = [R.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def cofactor_charpoly(A):
    """det(Z I - A) by Laplace expansion along the first row."""
    R = A.ring
    d = A.rows
    M = [[[-A[i, j], R.one()] if i == j else [-A[i, j]] for j in range(d)]
         for i in range(d)]

    def det(rows, cols):
        if len(rows) == 1:
            return M[rows[0]][cols[0]]
        total = [R.zero()]
        for k, c in enumerate(cols):
            minor = det(rows[1:], cols[:k] + cols[k + 1:])
            term = _pmul(M[rows[0]][c], minor, R)
            if k % 2:
                term = [-t for t in term]
            total = _padd(total, term, R)
        return total

    return det(list(range(d)), list(range(d)))


def test_product_examples():
    R, A = kp()
    X1, X2 = R.var(0), R.var(1)
    assert matmul(SeriesMatrix.identity(R, 2), A) == A
    P = matmul(SeriesMatrix.diag(R, [X1, X2]), SeriesMatrix.diag(R, [X2, X1]))
    assert P == SeriesMatrix.diag(R, [X1 * X2, X1 * X2])
    with pytest.raises(DimensionMismatch):
        matmul(A, SeriesMatrix.zeros(R, 3, 1))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_product_matches_schoolbook(seed):
    rng = random.Random(seed)
    R = SeriesRing(2, 4)
    A, B = rand_matrix(R, rng, 2, 2), rand_matrix(R, rng, 2, 2)
    P = matmul(A, B)
    for i in range(2):
        for j in range(2):
            want = R.zero()
            for k in range(2):
                for ea, ca in A[i, k].terms.items():
                    for eb, cb in B[k, j].terms.items():
                        want = want + R.monomial([x + y for x, y in zip(ea, eb)], ca * cb)
            assert P[i, j] == want


def test_adjoint_examples():
    R = SeriesRing(1, 4)
    X1 = R.var(0)
    assert adjoint(SeriesMatrix(R, [[X1.scale(I)]])) == SeriesMatrix(R, [[X1.scale(-I)]])
    _, A = kp()
    assert adjoint(A) == A


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_adjoint_reverses_products(seed):
    rng = random.Random(seed)
    R = SeriesRing(2, 4)
    A, B = rand_matrix(R, rng, 2, 3), rand_matrix(R, rng, 3, 2)
    assert adjoint(matmul(A, B)) == matmul(adjoint(B), adjoint(A))
    assert adjoint(adjoint(A)) == A


def test_normality_examples():
    R = SeriesRing(2, 6)
    X1, X2 = R.var(0), R.var(1)
    assert is_normal(SeriesMatrix(R, [[X1, X2], [-X2, X1]]))
    assert not is_normal(SeriesMatrix(R, [[R.zero(), X1], [R.zero(), R.zero()]]))
    assert is_normal(kp()[1])
    assert is_unitary(SeriesMatrix.identity(R, 3))
    with pytest.raises(NotSquare):
        is_normal(SeriesMatrix.zeros(R, 2, 3))


def test_char_poly_examples():
    R = SeriesRing(2, 6)
    P = char_poly(SeriesMatrix.identity(R, 2))
    assert P.c(1) == R.constant(-2) and P.c(2) == R.one()
    R, A = kp()
    X1, X2 = R.var(0), R.var(1)
    P = char_poly(A)
    assert P.c(1) == -(X1 * X1 + X2 * X2)
    assert P.c(2).is_zero()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_char_poly_matches_cofactor_oracle(seed):
    rng = random.Random(seed)
    R = SeriesRing(2, 4)
    A = rand_matrix(R, rng, 3, 3)
    P = char_poly(A)
    Q = cofactor_charpoly(A)
    assert len(Q) == 4 and Q[3] == R.one()
    for i in range(1, 4):
        assert P.c(i) == Q[3 - i]


def test_power_sum_examples():
    R = SeriesRing(2, 8)
    X1, X2 = R.var(0), R.var(1)
    p = power_sums(SeriesMatrix.diag(R, [X1, -X1]), 2)
    assert p[1].is_zero() and p[2] == (X1 * X1).scale(2)
    _, A = kp(8)
    s = X1 * X1 + X2 * X2
    p = power_sums(A, 2)
    assert p[1] == s and p[2] == s * s
    assert matmul(A, A) == A.map(lambda e: e * s)
    p = power_sums(SeriesMatrix.identity(R, 3), 4)
    assert all(v == R.constant(3) for v in p)

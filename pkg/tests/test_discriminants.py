from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _generators import cayley_unitary, root_family
from mpert.discriminants import (
    coefficient_ideal_check,
    discriminants_from_roots,
    generalized_discriminants,
    hypothesis_check,
    multiplicity_relation_check,
)
from mpert.errors import (
    AllCoefficientsZero,
    InsufficientPowerSums,
    NotTraceFree,
    TooLarge,
)
from mpert.matrix import CharPoly, SeriesMatrix, adjoint, char_poly, matmul, power_sums
from mpert.series import SeriesRing


def ring(n=2, N=6):
    R = SeriesRing(n, N)
    return R, R.var(0), R.var(1) if n > 1 else None


def kp(N=6):
    R, X1, X2 = ring(2, N)
    return SeriesMatrix(R, [[X1 * X1, X1 * X2], [X1 * X2, X2 * X2]])


def family_matrix(rng, roots):
    """Q diag(roots) Q^* with an exact Cayley unitary Q."""
    xs = [s for s, m in roots for _ in range(m)]
    R = xs[0].ring
    Q = SeriesMatrix.from_constants(R, cayley_unitary(rng, len(xs)))
    return matmul(matmul(Q, SeriesMatrix.diag(R, xs)), adjoint(Q))


def test_kp_discriminant():
    A = kp()
    R, X1, X2 = ring()
    p = power_sums(A, 2)
    deltas = generalized_discriminants(p, 2)
    assert deltas[1] == p[2].scale(2) - p[1] * p[1]
    assert deltas[1] == (X1 * X1 + X2 * X2) ** 2


def test_three_root_examples():
    R, X1, _ = ring()
    roots = [X1, -X1, R.zero()]
    hankel = generalized_discriminants(power_sums(SeriesMatrix.diag(R, roots), 4), 3)
    oracle = discriminants_from_roots(roots)
    assert hankel[2] == (X1 ** 6).scale(4)
    assert hankel == oracle


def test_scalar_matrix_has_one_root():
    R, _, _ = ring()
    A = SeriesMatrix.identity(R, 3).scale(5)
    rep = hypothesis_check(A)
    assert rep.l_star == 1
    assert rep.discriminants[0] == R.constant(3)
    assert all(d.is_zero() for d in rep.discriminants[1:])


def test_defining_sum_examples():
    R, X1, X2 = ring()
    a = R.constant(3)
    out = discriminants_from_roots([a, a])
    assert out[0] == R.constant(2) and out[1].is_zero()
    assert discriminants_from_roots([X1, X2])[1] == (X1 - X2) ** 2
    b = 1 + X2
    assert discriminants_from_roots([(a, 2), (b, 1)])[1] == ((a - b) ** 2).scale(2)
    assert discriminants_from_roots([(X1, 2), (X2, 2)])[1] == ((X1 - X2) ** 2).scale(4)
    with pytest.raises(TooLarge):
        discriminants_from_roots([X1] * 7)
    with pytest.raises(InsufficientPowerSums):
        generalized_discriminants([R.one()], 2)


def test_hypothesis_examples():
    rep = hypothesis_check(kp())
    assert not rep.monomial_unit
    R, X1, X2 = ring()
    rep = hypothesis_check(SeriesMatrix.diag(R, [X1, X1 + X1 * X2]))
    assert rep.monomial_unit and rep.exponent == (2, 2)
    assert rep.delta == X1 ** 2 * X2 ** 2
    rep = hypothesis_check(SeriesMatrix.diag(R, [R.constant(k) for k in (1, 2, 3)]))
    assert rep.l_star == 3 and rep.delta == R.constant(4)
    assert rep.monomial_unit and rep.exponent == (0, 0)


def test_coefficient_ideal_examples():
    R, X1, X2 = ring(2, 8)
    z = R.zero()
    # d = 2: g_2 = c_2^(2!/2) = c_2 itself
    assert coefficient_ideal_check(CharPoly(2, (z, X1 * X1))) == (True, (2, 0))
    assert coefficient_ideal_check(CharPoly(2, (z, X1 * X1 + X2 * X2)))[0] is False
    u = 1 + X2
    assert coefficient_ideal_check(CharPoly(3, (z, X1 * X1, X1 ** 3 * u))) == (True, (6, 0))
    with pytest.raises(NotTraceFree):
        coefficient_ideal_check(CharPoly(2, (X1, X1)))
    with pytest.raises(AllCoefficientsZero):
        coefficient_ideal_check(CharPoly(2, (z, z)))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_hankel_equals_defining_sum(seed, d):
    rng = random.Random(seed)
    R = SeriesRing(rng.randint(1, 2), rng.randint(2, 6))
    roots = root_family(rng, R, d)
    A = family_matrix(rng, roots)
    hankel = generalized_discriminants(power_sums(A, 2 * d - 2), d)
    assert hankel == discriminants_from_roots(roots)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5))
def test_multiplicity_relation(seed, d):
    rng = random.Random(seed)
    R = SeriesRing(2, rng.randint(2, 6))
    roots = root_family(rng, R, d)
    A = family_matrix(rng, roots)
    assert multiplicity_relation_check(roots, char_poly(A))
    assert hypothesis_check(A).l_star == len(roots)

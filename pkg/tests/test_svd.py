from __future__ import annotations

import random

import pytest

from _generators import cayley_unitary
from mpert.diagonalize import canonical_key, well_ordered_check
from mpert.errors import (
    BlockHypothesisViolated,
    HypothesisViolated,
    NotASquareInField,
    NotReal,
    RefinementHypothesisViolated,
)
from mpert.matrix import SeriesMatrix, adjoint, matmul
from mpert.scalar import QI2, FloatField
from mpert.series import SeriesRing, sqrt_unit
from mpert.svd import svd_monomial_refine, svd_series

I = QI2(0, 0, 1, 0)


def two_vars(N=6, field=None):
    R = SeriesRing(2, N, field)
    return R, R.var(0), R.var(1)


def test_zero_matrix():
    R, _, _ = two_vars()
    res = svd_series(SeriesMatrix.zeros(R, 2, 3))
    assert res.D.is_zero()
    assert res.V == SeriesMatrix.identity(R, 2)
    assert res.U == SeriesMatrix.identity(R, 3)


def test_scalar_entry_is_its_own_svd():
    R, X1, X2 = two_vars()
    a = X1 + X2.scale(I)
    res = svd_series(SeriesMatrix(R, [[a]]))
    assert res.entries == [a]
    assert res.U == SeriesMatrix.identity(R, 1) and res.V == SeriesMatrix.identity(R, 1)


def test_refine_rejects_coprime_parts():
    R, X1, X2 = two_vars()
    res = svd_series(SeriesMatrix(R, [[X1 + X2.scale(I)]]))
    with pytest.raises(RefinementHypothesisViolated):
        svd_monomial_refine(res)


@pytest.mark.parametrize("backend", ["exact", "float"])
def test_refine_monomial_times_unit(backend):
    field = FloatField() if backend == "float" else None
    R, X1, X2 = two_vars(6, field)
    a = X1 * (1 + X2.scale(I))
    ref = svd_monomial_refine(svd_series(SeriesMatrix(R, [[a]])))
    want = X1 * sqrt_unit(1 + X2 * X2)
    (entry,) = ref.entries
    assert (entry - want).truncate(ref.reliable_degree).max_abs() <= 1e-20
    assert entry.is_real()
    u = ref.U[0, 0]
    assert ((u * u.conj()) - 1).truncate(ref.reliable_degree).max_abs() <= 1e-20
    assert (a * u).truncate(ref.reliable_degree).is_real()
    assert ref.well_ordered
    assert ref.residual.within(1e-20)


def test_real_block_refinement():
    # (a, b) = X1 (2, 3): the refined diagonal is X1 sqrt13 twice
    R, X1, _ = two_vars()
    A = SeriesMatrix(R, [[X1.scale(2), X1.scale(3)], [X1.scale(-3), X1.scale(2)]])
    res = svd_series(A, real=True)
    assert res.mode == "real-block"
    with pytest.raises(NotASquareInField):
        svd_monomial_refine(res)
    FR = R.with_field(FloatField())
    ref = svd_monomial_refine(svd_series(A.to_field(FR), real=True))
    assert ref.mode == "real-diagonal-refined"
    root13 = FR.field.sqrt_nonneg_real(13)
    for e in ref.entries:
        assert (e - FR.var(0).scale(root13)).max_abs() <= 1e-20
    assert ref.residual.within(1e-20)


def test_round_trip_recovers_multiset():
    rng = random.Random(3)
    R, X1, X2 = two_vars()
    V0 = SeriesMatrix.from_constants(R, cayley_unitary(rng, 2))
    U0 = SeriesMatrix.from_constants(R, cayley_unitary(rng, 3))
    D = SeriesMatrix(R, [[X1, R.zero(), R.zero()], [R.zero(), (X1 * X2).scale(I), R.zero()]])
    A = matmul(matmul(V0, D), adjoint(U0))
    res = svd_series(A)
    assert res.residual.conjugation == 0 and res.residual.unitarity == 0
    # entries are fixed only up to a unit phase
    got = sorted((e * e.conj() for e in res.entries), key=canonical_key)
    assert got == sorted([X1 * X1, (X1 * X2) ** 2], key=canonical_key)
    ref = svd_monomial_refine(res)
    assert sorted(ref.entries, key=canonical_key) == sorted([X1, X1 * X2], key=canonical_key)
    assert ref.well_ordered and well_ordered_check(ref.entries)
    assert ref.residual.conjugation == 0 and ref.residual.unitarity == 0


def test_tall_matrix_goes_through_the_adjoint():
    R, X1, X2 = two_vars()
    A = SeriesMatrix(R, [[X1], [R.zero()], [R.zero()]])
    res = svd_series(A)
    assert res.D.shape == (3, 1)
    assert res.residual.conjugation == 0 and res.residual.unitarity == 0


def test_gate_rejects_kp_gram_matrix():
    R, X1, X2 = two_vars()
    A = SeriesMatrix(R, [[X1, X2]])
    with pytest.raises(HypothesisViolated):
        svd_series(SeriesMatrix(R, [[X1 * X1, X1 * X2], [X1 * X2, X2 * X2]]))
    # a 1 x 2 row: A*A is the rank one KP-type matrix
    with pytest.raises(HypothesisViolated):
        svd_series(A)


def test_block_hypothesis_failure():
    # A*A = (X1^2 + X2^2) I passes the gate, but the block itself is KP-like
    R, X1, X2 = two_vars()
    A = SeriesMatrix(R, [[X1, X2], [X2, -X1]])
    with pytest.raises(BlockHypothesisViolated) as info:
        svd_series(A)
    assert info.value.locus.startswith("svd.block")


def test_real_mode_needs_real_entries():
    R, X1, _ = two_vars()
    with pytest.raises(NotReal):
        svd_series(SeriesMatrix(R, [[X1.scale(I)]]), real=True)


from __future__ import annotations

import random

import gmpy2
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpert import _pykernels

_ckernels = pytest.importorskip("mpert._ckernels")

SHIFT = 16


def keys(rng, n):
    out = set()
    while len(out) < n:
        deg = rng.randint(0, 6)
        out.add((deg << SHIFT) + rng.randint(0, 50))
    return sorted(out)


def exact_vals(rng, n, gaussian):
    def one():
        v = [rng.randint(-10 ** 12, 10 ** 12) for _ in range(4)]
        if gaussian:
            v[1] = v[3] = 0
        return tuple(v)
    return [one() for _ in range(n)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans())
def test_exact_kernels_agree(seed, gaussian):
    rng = random.Random(seed)
    pairs = []
    for _ in range(rng.randint(1, 3)):
        na, nb = rng.randint(0, 8), rng.randint(0, 8)
        pairs.append((keys(rng, na), exact_vals(rng, na, gaussian),
                      keys(rng, nb), exact_vals(rng, nb, gaussian), rng.randint(1, 5)))
    limit = rng.randint(0, 10)
    py = _pykernels.dot_exact(pairs, limit, SHIFT, gaussian)
    cy = _ckernels.dot_exact(pairs, limit, SHIFT, gaussian)
    assert {k: list(v) for k, v in py.items()} == {k: list(v) for k, v in cy.items()}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_float_kernels_agree(seed):
    rng = random.Random(seed)
    gmpy2.get_context().precision = 256
    pairs = []
    for _ in range(rng.randint(1, 3)):
        na, nb = rng.randint(0, 8), rng.randint(0, 8)
        va = [gmpy2.mpc(rng.random(), rng.random()) for _ in range(na)]
        vb = [gmpy2.mpc(rng.random(), rng.random()) for _ in range(nb)]
        pairs.append((keys(rng, na), va, keys(rng, nb), vb))
    limit = rng.randint(0, 10)
    assert _pykernels.dot_float(pairs, limit, SHIFT) == _ckernels.dot_float(pairs, limit, SHIFT)

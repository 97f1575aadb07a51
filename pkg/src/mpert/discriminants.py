"""Generalized discriminants and the monomial hypothesis tests.

For a monic polynomial with roots xi_1..xi_d the l-th generalized
discriminant is the sum over l-subsets of the product of squared pairwise
root differences.  It equals the l x l leading principal minor of the Hankel
matrix of power sums (p_{i+j}), which is how it is computed here; the
defining sum is kept as an oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from mpert.errors import (
    AllCoefficientsZero,
    InsufficientPowerSums,
    NotTraceFree,
    TooLarge,
)
from mpert.matrix import CharPoly, SeriesMatrix, char_poly, determinant, power_sums
from mpert.series import Series, is_monomial_times_unit, monomial_content


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of :func:`hypothesis_check`.

    ``l_star`` is the index of the first nonzero generalized discriminant
    (the number of distinct eigenvalues) and ``delta`` that discriminant.
    """

    l_star: int
    delta: Series
    monomial_unit: bool
    exponent: tuple | None
    last_coeff_monomial_unit: bool
    last_coeff_index: int | None
    last_coeff_exponent: tuple | None
    reliable_degree: int
    discriminants: tuple


def generalized_discriminants(p: Sequence[Series], d: int) -> list[Series]:
    """Delta_1..Delta_d from the power sums p_0..p_{2d-2}."""
    if len(p) < 2 * d - 1:
        raise InsufficientPowerSums(
            f"need power sums p_0..p_{2 * d - 2}, got {len(p)} values")
    ring = p[0].ring
    out = []
    for l in range(1, d + 1):
        H = SeriesMatrix(ring, [[p[i + j] for j in range(l)] for i in range(l)])
        out.append(determinant(H))
    return out


def _as_root_list(roots) -> list[Series]:
    out = []
    for r in roots:
        if isinstance(r, tuple):
            s, m = r
            out.extend([s] * m)
        else:
            out.append(r)
    return out


def discriminants_from_roots(roots, max_degree: int = 6) -> list[Series]:
    """Delta_1..Delta_d straight from the defining sum over l-subsets.

    ``roots`` lists root series, either repeated or as ``(series, multiplicity)``
    pairs.
    """
    xs = _as_root_list(roots)
    d = len(xs)
    if d > max_degree:
        raise TooLarge(f"defining-sum oracle limited to degree {max_degree}, got {d}")
    if d == 0:
        return []
    ring = xs[0].ring
    sq = {}
    for i, j in combinations(range(d), 2):
        diff = xs[i] - xs[j]
        sq[i, j] = diff * diff
    out = []
    for l in range(1, d + 1):
        total = ring.zero()
        for subset in combinations(range(d), l):
            term = ring.one()
            for i, j in combinations(subset, 2):
                term = term * sq[i, j]
                if term.is_zero():
                    break
            total = total + term
        out.append(total)
    return out


def power_sums_from_charpoly(P: CharPoly, kmax: int) -> list[Series]:
    """Power sums of the roots by Newton's identities."""
    d = P.degree
    ring = P.coeffs[0].ring if d else None
    c = [ring.one()] + list(P.coeffs)
    p = [ring.constant(d)]
    for k in range(1, kmax + 1):
        acc = ring.zero()
        for i in range(1, min(k - 1, d) + 1):
            acc = acc + c[i] * p[k - i]
        if k <= d:
            acc = acc + c[k].scale(k)
        p.append(-acc)
    return p


def first_nonzero(deltas: Sequence[Series]) -> int:
    """Largest l with Delta_l nonzero (Delta_1 = d is never zero for d >= 1)."""
    for l in range(len(deltas), 0, -1):
        if not deltas[l - 1].is_zero():
            return l
    return 0


def hypothesis_check(A: SeriesMatrix) -> HypothesisReport:
    """Compute Delta_A and test it (and the last nonzero coefficient of the
    characteristic polynomial) for being a monomial times a unit."""
    d = A._square()
    p = power_sums(A, max(0, 2 * d - 2))
    deltas = generalized_discriminants(p, d)
    l_star = first_nonzero(deltas)
    delta = deltas[l_star - 1] if l_star else A.ring.zero()
    flag, exp = is_monomial_times_unit(delta)
    P = char_poly(A)
    last = P.last_nonzero()
    if last is None:
        lflag, lidx, lexp = False, None, None
    else:
        lidx = last[0]
        lflag, lexp = is_monomial_times_unit(last[1])
    return HypothesisReport(
        l_star=l_star,
        delta=delta,
        monomial_unit=flag,
        exponent=exp,
        last_coeff_monomial_unit=lflag,
        last_coeff_index=lidx,
        last_coeff_exponent=lexp,
        reliable_degree=delta.rel,
        discriminants=tuple(deltas),
    )


def multiplicity_relation_check(roots, P: CharPoly) -> bool:
    """Check Delta_A = mu_1...mu_l * disc(P_red) for known roots with multiplicities.

    ``roots`` is a sequence of ``(series, multiplicity)`` pairs of distinct roots.
    """
    roots = list(roots)
    d = P.degree
    p = power_sums_from_charpoly(P, 2 * d - 2)
    deltas = generalized_discriminants(p, d)
    l_star = first_nonzero(deltas)
    if l_star != len(roots):
        return False
    ring = deltas[0].ring
    disc = ring.one()
    for (a, _), (b, _) in combinations(roots, 2):
        diff = a - b
        disc = disc * diff * diff
    mu = math.prod(m for _, m in roots)
    return deltas[l_star - 1].equal_mod(disc.scale(mu))


def coefficient_ideal_check(P: CharPoly) -> tuple[bool, tuple | None]:
    """Is the ideal generated by g_i = c_i^(d!/i), i >= 2, principal and monomial?

    Returns ``(True, gamma)`` when some g_j is a monomial times a unit whose
    exponent gamma is coordinatewise below the monomial content of every
    nonzero g_i.  Contents use content(c^k) = k * content(c), so no power is
    expanded.
    """
    d = P.degree
    if d >= 1 and not P.coeffs[0].is_zero():
        raise NotTraceFree("coefficient test expects a trace-free polynomial (c_1 = 0)")
    fact = math.factorial(d)
    items = []
    for i in range(2, d + 1):
        c = P.coeffs[i - 1]
        if c.is_zero():
            continue
        k = fact // i
        gamma = tuple(k * a for a in monomial_content(c))
        flag, _ = is_monomial_times_unit(c)
        items.append((gamma, flag))
    if not items:
        raise AllCoefficientsZero("c_2..c_d all vanish")
    for gamma, flag in items:
        if flag and all(all(a <= b for a, b in zip(gamma, other)) for other, _ in items):
            return True, gamma
    return False, None

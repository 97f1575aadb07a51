"""Pure Python series product kernels.

Exponents are packed into integer keys whose high bits hold the total degree,
so adding two keys multiplies the monomials and a sorted key list is sorted
by degree.  Every kernel takes a list of ``pairs`` and accumulates the sum of
their truncated products.

Exact pairs are ``(akeys, avals, bkeys, bvals, mult)`` where the values are
4-tuples of integers ``(a, b, c, d)`` standing for ``(a + b sqrt2) + (c + d
sqrt2) i`` and ``mult`` is an integer scale factor.  Float pairs carry
``gmpy2.mpc`` values and no multiplier.
"""
from __future__ import annotations


def dot_exact(pairs, limit: int, shift: int, gaussian: bool) -> dict:
    """Sum of products of exact series, dropping degrees above ``limit``."""
    stop = (limit + 1) << shift
    acc: dict = {}
    get = acc.get
    for akeys, avals, bkeys, bvals, mult in pairs:
        nb = len(bkeys)
        if not nb or not akeys:
            continue
        b0key = bkeys[0]
        for i in range(len(akeys)):
            ka = akeys[i]
            if ka + b0key >= stop:
                break
            a0, a1, a2, a3 = avals[i]
            if mult != 1:
                a0 *= mult
                a1 *= mult
                a2 *= mult
                a3 *= mult
            if gaussian:
                for j in range(nb):
                    k = ka + bkeys[j]
                    if k >= stop:
                        break
                    b = bvals[j]
                    b0 = b[0]
                    b2 = b[2]
                    r = get(k)
                    if r is None:
                        acc[k] = [a0 * b0 - a2 * b2, 0, a0 * b2 + a2 * b0, 0]
                    else:
                        r[0] += a0 * b0 - a2 * b2
                        r[2] += a0 * b2 + a2 * b0
            else:
                for j in range(nb):
                    k = ka + bkeys[j]
                    if k >= stop:
                        break
                    b0, b1, b2, b3 = bvals[j]
                    re0 = a0 * b0 + 2 * a1 * b1 - a2 * b2 - 2 * a3 * b3
                    re1 = a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2
                    im0 = a0 * b2 + 2 * a1 * b3 + a2 * b0 + 2 * a3 * b1
                    im1 = a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0
                    r = get(k)
                    if r is None:
                        acc[k] = [re0, re1, im0, im1]
                    else:
                        r[0] += re0
                        r[1] += re1
                        r[2] += im0
                        r[3] += im1
    return acc


def dot_float(pairs, limit: int, shift: int) -> dict:
    """Sum of products of float series, dropping degrees above ``limit``."""
    stop = (limit + 1) << shift
    acc: dict = {}
    get = acc.get
    for akeys, avals, bkeys, bvals in pairs:
        nb = len(bkeys)
        if not nb or not akeys:
            continue
        b0key = bkeys[0]
        for i in range(len(akeys)):
            ka = akeys[i]
            if ka + b0key >= stop:
                break
            a = avals[i]
            for j in range(nb):
                k = ka + bkeys[j]
                if k >= stop:
                    break
                r = get(k)
                if r is None:
                    acc[k] = a * bvals[j]
                else:
                    acc[k] = r + a * bvals[j]
    return acc

# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled series product kernels.

Same contract as :mod:`mpert._pykernels`.  Keys are handled as C 64-bit
integers when the packed exponents fit, otherwise as Python integers.
"""
from libc.stdlib cimport malloc, free


cdef inline bint _fits(list keys, long long bound):
    return not keys or keys[len(keys) - 1] < bound


def dot_exact(list pairs, long limit, long shift, bint gaussian):
    cdef dict acc = {}
    cdef Py_ssize_t i, j, na, nb
    cdef long long ka, kb0, k, stop
    cdef long long *bk
    cdef list akeys, avals, bkeys, bvals, r
    cdef object a0, a1, a2, a3, b0, b1, b2, b3, mult, key, b
    if shift >= 61 or (limit + 1) >= (1LL << (61 - shift)):
        from mpert._pykernels import dot_exact as slow
        return slow(pairs, limit, shift, gaussian)
    stop = (<long long>(limit + 1)) << shift
    for item in pairs:
        akeys, avals, bkeys, bvals, mult = item
        na = len(akeys)
        nb = len(bkeys)
        if na == 0 or nb == 0:
            continue
        if not (_fits(akeys, 1LL << 62) and _fits(bkeys, 1LL << 62)):
            from mpert._pykernels import dot_exact as slow
            part = slow([item], limit, shift, gaussian)
            for key, v in part.items():
                r = acc.get(key)
                if r is None:
                    acc[key] = v
                else:
                    r[0] += v[0]; r[1] += v[1]; r[2] += v[2]; r[3] += v[3]
            continue
        bk = <long long *>malloc(nb * sizeof(long long))
        try:
            for j in range(nb):
                bk[j] = bkeys[j]
            kb0 = bk[0]
            for i in range(na):
                ka = akeys[i]
                if ka + kb0 >= stop:
                    break
                a0, a1, a2, a3 = avals[i]
                if mult != 1:
                    a0 = a0 * mult; a1 = a1 * mult
                    a2 = a2 * mult; a3 = a3 * mult
                if gaussian:
                    for j in range(nb):
                        k = ka + bk[j]
                        if k >= stop:
                            break
                        b = bvals[j]
                        b0 = b[0]
                        b2 = b[2]
                        key = k
                        r = acc.get(key)
                        if r is None:
                            acc[key] = [a0 * b0 - a2 * b2, 0, a0 * b2 + a2 * b0, 0]
                        else:
                            r[0] += a0 * b0 - a2 * b2
                            r[2] += a0 * b2 + a2 * b0
                else:
                    for j in range(nb):
                        k = ka + bk[j]
                        if k >= stop:
                            break
                        b0, b1, b2, b3 = bvals[j]
                        key = k
                        re0 = a0 * b0 + 2 * a1 * b1 - a2 * b2 - 2 * a3 * b3
                        re1 = a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2
                        im0 = a0 * b2 + 2 * a1 * b3 + a2 * b0 + 2 * a3 * b1
                        im1 = a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0
                        r = acc.get(key)
                        if r is None:
                            acc[key] = [re0, re1, im0, im1]
                        else:
                            r[0] += re0; r[1] += re1
                            r[2] += im0; r[3] += im1
        finally:
            free(bk)
    return acc


def dot_float(list pairs, long limit, long shift):
    cdef dict acc = {}
    cdef Py_ssize_t i, j, na, nb
    cdef long long ka, kb0, k, stop
    cdef long long *bk
    cdef list akeys, avals, bkeys, bvals
    cdef object a, r, key
    if shift >= 61 or (limit + 1) >= (1LL << (61 - shift)):
        from mpert._pykernels import dot_float as slow
        return slow(pairs, limit, shift)
    stop = (<long long>(limit + 1)) << shift
    for item in pairs:
        akeys, avals, bkeys, bvals = item
        na = len(akeys)
        nb = len(bkeys)
        if na == 0 or nb == 0:
            continue
        if not (_fits(akeys, 1LL << 62) and _fits(bkeys, 1LL << 62)):
            from mpert._pykernels import dot_float as slow
            for key, v in slow([item], limit, shift).items():
                r = acc.get(key)
                acc[key] = v if r is None else r + v
            continue
        bk = <long long *>malloc(nb * sizeof(long long))
        try:
            for j in range(nb):
                bk[j] = bkeys[j]
            kb0 = bk[0]
            for i in range(na):
                ka = akeys[i]
                if ka + kb0 >= stop:
                    break
                a = avals[i]
                for j in range(nb):
                    k = ka + bk[j]
                    if k >= stop:
                        break
                    key = k
                    r = acc.get(key)
                    if r is None:
                        acc[key] = a * bvals[j]
                    else:
                        acc[key] = r + a * bvals[j]
        finally:
            free(bk)
    return acc

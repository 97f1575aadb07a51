"""Sparse truncated multivariate power series.

A :class:`SeriesRing` fixes the number of variables ``n``, the truncation cap
``N`` and the coefficient field.  A :class:`Series` stores only terms of total
degree at most its *reliable degree* ``rel <= N``: the degree through which
its coefficients are known to be correct.  Arithmetic propagates ``rel``;
dividing by a monomial lowers it.

Exact coefficients are stored as integer 4-tuples over one common positive
denominator, float coefficients as ``gmpy2.mpc``.  Exponents are packed into
integer keys (see :mod:`mpert._pykernels`).
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2

from mpert import kernels
from mpert.errors import (
    DimensionMismatch,
    NotAUnit,
    NotDivisible,
    OrderViolation,
    ZeroSeries,
)
from mpert.scalar import QI2, ExactField, FloatField

_ZERO4 = (0, 0, 0, 0)


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def qi2_to_int4(x: QI2) -> tuple[tuple[int, int, int, int], int]:
    """Split an exact scalar into integer components and a common denominator."""
    den = 1
    for f in (x.a, x.b, x.c, x.d):
        den = _lcm(den, f.denominator)
    return (
        (x.a.numerator * (den // x.a.denominator),
         x.b.numerator * (den // x.b.denominator),
         x.c.numerator * (den // x.c.denominator),
         x.d.numerator * (den // x.d.denominator)),
        den,
    )


def int4_to_qi2(v, den: int) -> QI2:
    return QI2._new(Fraction(v[0], den), Fraction(v[1], den),
                    Fraction(v[2], den), Fraction(v[3], den))


def grlex_key(exp: Sequence[int]) -> tuple:
    """Sort key for graded-lexicographic output order."""
    return (sum(exp), tuple(-a for a in exp))


class SeriesRing:
    """Truncated ring ``K[[X_1..X_n]] / (degree > cap)``."""

    def __init__(self, nvars: int, cap: int, field=None,
                 names: Sequence[str] | None = None):
        if nvars < 0 or cap < 0:
            raise ValueError("variable count and cap must be nonnegative")
        self.nvars = int(nvars)
        self.cap = int(cap)
        self.field = field if field is not None else ExactField()
        if names is None:
            names = [f"X{i + 1}" for i in range(self.nvars)]
        if len(names) != self.nvars:
            raise ValueError("one name per variable is required")
        self.names = tuple(names)
        self.bits = max(1, self.cap.bit_length())
        self.shift = self.nvars * self.bits
        self._mask = (1 << self.bits) - 1

    @property
    def exact(self) -> bool:
        return self.field.exact

    def __eq__(self, other):
        return (isinstance(other, SeriesRing) and self.nvars == other.nvars
                and self.cap == other.cap and self.field == other.field)

    def __hash__(self):
        return hash((self.nvars, self.cap, self.field))

    def __repr__(self):
        return f"SeriesRing(nvars={self.nvars}, cap={self.cap}, field={self.field!r})"

    def with_cap(self, cap: int) -> "SeriesRing":
        return SeriesRing(self.nvars, cap, self.field, self.names)

    def with_field(self, field) -> "SeriesRing":
        return SeriesRing(self.nvars, self.cap, field, self.names)

    # exponent packing ---------------------------------------------------
    def pack(self, exp: Sequence[int]) -> int:
        if len(exp) != self.nvars:
            raise DimensionMismatch(
                f"exponent {tuple(exp)} has {len(exp)} entries, expected {self.nvars}")
        key = 0
        deg = 0
        for a in exp:
            if a < 0:
                raise ValueError(f"negative exponent in {tuple(exp)}")
            if a > self._mask:
                raise ValueError(f"exponent {tuple(exp)} exceeds the cap")
            key = (key << self.bits) | a
            deg += a
        return (deg << self.shift) | key

    def unpack(self, key: int) -> tuple[int, ...]:
        bits, mask = self.bits, self._mask
        out = [0] * self.nvars
        for i in range(self.nvars - 1, -1, -1):
            out[i] = key & mask
            key >>= bits
        return tuple(out)

    def degree_of(self, key: int) -> int:
        return key >> self.shift

    # constructors -------------------------------------------------------
    def zero(self, rel: int | None = None) -> "Series":
        return Series._raw(self, {}, 1, self.cap if rel is None else rel)

    def one(self) -> "Series":
        return self.constant(1)

    def constant(self, c) -> "Series":
        return self.monomial((0,) * self.nvars, c)

    def var(self, i: int) -> "Series":
        exp = [0] * self.nvars
        exp[i] = 1
        return self.monomial(exp)

    def monomial(self, exp: Sequence[int], coeff=1) -> "Series":
        return self.from_dict({tuple(exp): coeff})

    def from_dict(self, terms: Mapping[Sequence[int], object],
                  rel: int | None = None) -> "Series":
        """Series from a map exponent -> coefficient; degrees above rel are dropped."""
        rel = self.cap if rel is None else min(rel, self.cap)
        F = self.field
        if self.exact:
            den = 1
            conv = []
            for exp, c in terms.items():
                v, d = qi2_to_int4(F(c))
                conv.append((exp, v, d))
                den = _lcm(den, d)
            out = {}
            for exp, v, d in conv:
                if sum(exp) > rel:
                    continue
                m = den // d
                k = self.pack(exp)
                if k in out:
                    o = out[k]
                    out[k] = (o[0] + v[0] * m, o[1] + v[1] * m,
                              o[2] + v[2] * m, o[3] + v[3] * m)
                else:
                    out[k] = (v[0] * m, v[1] * m, v[2] * m, v[3] * m)
            return Series._exact(self, out, den, rel)
        out = {}
        for exp, c in terms.items():
            if sum(exp) > rel:
                continue
            k = self.pack(exp)
            out[k] = out.get(k, 0) + F(c)
        return Series._float(self, out, rel)

    def check(self, other: "Series") -> None:
        r = other.ring
        if r is not self and not (r.nvars == self.nvars and r.cap == self.cap
                                  and r.field == self.field):
            raise DimensionMismatch(f"series rings differ: {self!r} vs {r!r}")


class Series:
    """Element of a :class:`SeriesRing`; immutable."""

    __slots__ = ("ring", "_t", "_den", "rel", "_sorted", "_gauss")

    # construction -------------------------------------------------------
    @classmethod
    def _raw(cls, ring: SeriesRing, t: dict, den: int, rel: int) -> "Series":
        obj = object.__new__(cls)
        obj.ring = ring
        obj._t = t
        obj._den = den
        obj.rel = rel
        obj._sorted = None
        obj._gauss = None
        return obj

    @classmethod
    def _exact(cls, ring, acc: dict, den: int, rel: int) -> "Series":
        """Normalize an exact accumulator: drop zeros and degrees > rel, reduce."""
        stop = (rel + 1) << ring.shift
        t = {}
        g = den
        for k, v in acc.items():
            if k >= stop:
                continue
            a, b, c, d = v
            if a or b or c or d:
                t[k] = (a, b, c, d)
                if g != 1:
                    g = math.gcd(math.gcd(math.gcd(math.gcd(g, a), b), c), d)
        if not t:
            return cls._raw(ring, t, 1, rel)
        if den < 0:
            g = -g
        if g != 1:
            t = {k: (v[0] // g, v[1] // g, v[2] // g, v[3] // g) for k, v in t.items()}
            den //= g
        return cls._raw(ring, t, den, rel)

    @classmethod
    def _float(cls, ring, acc: dict, rel: int) -> "Series":
        stop = (rel + 1) << ring.shift
        tol2 = ring.field._eps2
        norm = gmpy2.norm
        t = {k: v for k, v in acc.items() if k < stop and norm(v) > tol2}
        return cls._raw(ring, t, 1, rel)

    # basic accessors ----------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.ring.field.exact

    @property
    def nvars(self) -> int:
        return self.ring.nvars

    @property
    def cap(self) -> int:
        return self.ring.cap

    def _items(self):
        s = self._sorted
        if s is None:
            keys = sorted(self._t)
            s = self._sorted = (keys, [self._t[k] for k in keys])
        return s

    def _is_gaussian(self) -> bool:
        g = self._gauss
        if g is None:
            g = self._gauss = all(not v[1] and not v[3] for v in self._t.values())
        return g

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def __len__(self):
        return len(self._t)

    @property
    def order(self):
        """Minimal total degree of the support (``math.inf`` for zero)."""
        if not self._t:
            return math.inf
        return self.ring.degree_of(self._items()[0][0])

    def _order_for_rel(self) -> int:
        return self.rel + 1 if not self._t else self.ring.degree_of(self._items()[0][0])

    def _value(self, v):
        return int4_to_qi2(v, self._den) if self.exact else v

    @property
    def terms(self) -> dict:
        """Map exponent -> coefficient, in graded-lex order."""
        unpack = self.ring.unpack
        pairs = [(unpack(k), self._value(v)) for k, v in self._t.items()]
        pairs.sort(key=lambda p: grlex_key(p[0]))
        return dict(pairs)

    def support(self) -> list[tuple[int, ...]]:
        return list(self.terms)

    def coeff(self, exp: Sequence[int]):
        k = self.ring.pack(exp)
        v = self._t.get(k)
        if v is None:
            return self.ring.field.zero
        return self._value(v)

    def constant(self):
        return self.coeff((0,) * self.nvars)

    def max_abs(self) -> float:
        """Largest coefficient magnitude (0.0 for the zero series)."""
        if not self._t:
            return 0.0
        if self.exact:
            return max(abs(complex(self._value(v))) for v in self._t.values())
        return float(max(abs(v) for v in self._t.values()))

    def max_abs_mp(self):
        """Largest coefficient magnitude as an mpfr (float backend)."""
        if not self._t:
            return gmpy2.mpfr(0)
        if self.exact:
            return max(abs(self._value(v).to_mpc()) for v in self._t.values())
        return max(abs(v) for v in self._t.values())

    # algebra --------------------------------------------------------------
    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            self.ring.check(other)
            return other
        return self.ring.constant(other)

    def _combine(self, other: "Series", sign: int) -> "Series":
        ring = self.ring
        rel = min(self.rel, other.rel)
        if ring.exact:
            da, db = self._den, other._den
            L = _lcm(da, db)
            ma, mb = L // da, (L // db) * sign
            acc = {}
            if ma == 1:
                acc.update(self._t)
            else:
                for k, v in self._t.items():
                    acc[k] = (v[0] * ma, v[1] * ma, v[2] * ma, v[3] * ma)
            for k, v in other._t.items():
                o = acc.get(k)
                if o is None:
                    acc[k] = (v[0] * mb, v[1] * mb, v[2] * mb, v[3] * mb)
                else:
                    acc[k] = (o[0] + v[0] * mb, o[1] + v[1] * mb,
                              o[2] + v[2] * mb, o[3] + v[3] * mb)
            return Series._exact(ring, acc, L, rel)
        acc = dict(self._t)
        for k, v in other._t.items():
            o = acc.get(k)
            if sign > 0:
                acc[k] = v if o is None else o + v
            else:
                acc[k] = -v if o is None else o - v
        return Series._float(ring, acc, rel)

    def __add__(self, other):
        return self._combine(self._coerce(other), 1)

    def __radd__(self, other):
        return self._combine(self._coerce(other), 1)

    def __sub__(self, other):
        return self._combine(self._coerce(other), -1)

    def __rsub__(self, other):
        return self._coerce(other)._combine(self, -1)

    def __neg__(self):
        if self.exact:
            t = {k: (-v[0], -v[1], -v[2], -v[3]) for k, v in self._t.items()}
            return Series._raw(self.ring, t, self._den, self.rel)
        return Series._raw(self.ring, {k: -v for k, v in self._t.items()}, 1, self.rel)

    def __pos__(self):
        return self

    def product_rel(self, other: "Series") -> int:
        oa, ob = self._order_for_rel(), other._order_for_rel()
        return min(self.ring.cap, oa + other.rel, ob + self.rel, self.rel + other.rel + 1)

    def mul(self, other: "Series", limit: int | None = None) -> "Series":
        """Product; ``limit`` further truncates the result (and its rel)."""
        self.ring.check(other)
        rel = self.product_rel(other)
        if limit is not None:
            rel = min(rel, limit)
        return dot([(self, other)], rel, self.ring)

    def __mul__(self, other):
        if isinstance(other, Series):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Series":
        """Multiply by a scalar."""
        ring = self.ring
        F = ring.field
        c = F(c)
        if ring.exact:
            if not c:
                return ring.zero(self.rel)
            v, d = qi2_to_int4(c)
            if v == (1, 0, 0, 0):
                return Series._exact(ring, dict(self._t), self._den * d, self.rel)
            items = self._items()
            acc = kernels.dot_exact([([0], [v], items[0], items[1], 1)],
                                    self.rel, ring.shift, not (v[1] or v[3]) and self._is_gaussian())
            return Series._exact(ring, acc, self._den * d, self.rel)
        return Series._float(ring, {k: v * c for k, v in self._t.items()}, self.rel)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self.mul(invert_unit(other))
        c = self.ring.field(other)
        if self.exact:
            c = QI2.coerce(c)
        return self.scale(1 / c if not self.exact else c.inverse())

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Series):
            if self.ring != other.ring:
                return False
            if self.exact:
                return self._den == other._den and self._t == other._t
            return self._t == other._t
        if isinstance(other, (int, Fraction, QI2)):
            return self == self.ring.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self._t.items()), self._den))

    def equal_mod(self, other: "Series", degree: int | None = None) -> bool:
        """Equality of all coefficients of total degree <= degree."""
        if degree is None:
            degree = min(self.rel, other.rel)
        d = (self - other).truncate(degree)
        if self.exact:
            return d.is_zero()
        return all(self.ring.field.is_zero(v) for v in d._t.values())

    # structural operations ----------------------------------------------
    def truncate(self, degree: int) -> "Series":
        """Drop terms of degree > degree (and lower the reliable degree)."""
        rel = min(self.rel, degree)
        if rel == self.rel:
            return self
        stop = (rel + 1) << self.ring.shift
        t = {k: v for k, v in self._t.items() if k < stop}
        return Series._raw(self.ring, t, self._den, rel)

    def with_rel(self, rel: int) -> "Series":
        """Same stored terms, with the reliable degree reset (clamped to the cap)."""
        rel = min(rel, self.ring.cap)
        stop = (rel + 1) << self.ring.shift
        t = {k: v for k, v in self._t.items() if k < stop}
        return Series._raw(self.ring, t, self._den, rel)

    def homogeneous(self, k: int) -> "Series":
        """Degree-k component, as an exact polynomial (rel = cap)."""
        shift = self.ring.shift
        t = {key: v for key, v in self._t.items() if key >> shift == k}
        if self.exact:
            return Series._exact(self.ring, t, self._den, self.ring.cap)
        return Series._raw(self.ring, t, 1, self.ring.cap)

    def degrees(self) -> list[int]:
        shift = self.ring.shift
        return sorted({k >> shift for k in self._t})

    def conj(self) -> "Series":
        if self.exact:
            t = {k: (v[0], v[1], -v[2], -v[3]) for k, v in self._t.items()}
            return Series._raw(self.ring, t, self._den, self.rel)
        return Series._raw(self.ring, {k: v.conjugate() for k, v in self._t.items()},
                           1, self.rel)

    def real_part(self) -> "Series":
        if self.exact:
            return Series._exact(self.ring, {k: (v[0], v[1], 0, 0) for k, v in self._t.items()},
                                 self._den, self.rel)
        return Series._float(self.ring, {k: gmpy2.mpc(v.real) for k, v in self._t.items()},
                             self.rel)

    def imag_part(self) -> "Series":
        if self.exact:
            return Series._exact(self.ring, {k: (v[2], v[3], 0, 0) for k, v in self._t.items()},
                                 self._den, self.rel)
        return Series._float(self.ring, {k: gmpy2.mpc(v.imag) for k, v in self._t.items()},
                             self.rel)

    def is_real(self) -> bool:
        if self.exact:
            return all(not v[2] and not v[3] for v in self._t.values())
        eps = self.ring.field.eps
        return all(abs(v.imag) <= eps for v in self._t.values())

    def mul_monomial(self, exp: Sequence[int]) -> "Series":
        ring = self.ring
        g = ring.pack(exp)
        dg = sum(exp)
        rel = min(ring.cap, self.rel + dg)
        stop = (rel + 1) << ring.shift
        t = {}
        for k, v in self._t.items():
            nk = k + g
            if nk < stop:
                t[nk] = v
        return Series._raw(ring, t, self._den, rel)

    def div_monomial(self, exp: Sequence[int]) -> "Series":
        ring = self.ring
        exp = tuple(exp)
        g = ring.pack(exp)
        t = {}
        for k, v in self._t.items():
            e = ring.unpack(k)
            if any(a < b for a, b in zip(e, exp)):
                raise NotDivisible(f"X^{exp} does not divide the term X^{e}")
            t[k - g] = v
        return Series._raw(ring, t, self._den, max(-1, self.rel - sum(exp)))

    def map_coefficients(self, fn) -> "Series":
        """Apply ``fn`` to each coefficient (as a field scalar)."""
        return self.ring.from_dict({e: fn(c) for e, c in self.terms.items()}, rel=self.rel)

    def chop(self, tol) -> "Series":
        """Zero real and imaginary coefficient parts of size at most ``tol`` (float only)."""
        if self.exact:
            return self
        t = {}
        for k, v in self._t.items():
            re = v.real if abs(v.real) > tol else 0
            im = v.imag if abs(v.imag) > tol else 0
            if re or im:
                t[k] = gmpy2.mpc(re, im)
        return Series._raw(self.ring, t, 1, self.rel)

    def to_field(self, ring: SeriesRing) -> "Series":
        """Convert into another ring with the same variables (e.g. exact -> float)."""
        F = ring.field
        return ring.from_dict({e: F(c) if not isinstance(c, QI2) or ring.exact else c.to_mpc()
                               for e, c in self.terms.items()}, rel=min(self.rel, ring.cap))

    # text ---------------------------------------------------------------
    def __repr__(self):
        return f"Series({self})"

    def __str__(self):
        if not self._t:
            return "0"
        names = self.ring.names
        parts = []
        for exp, c in self.terms.items():
            mono = "*".join(
                (n if a == 1 else f"{n}^{a}") for n, a in zip(names, exp) if a)
            cs = str(c) if self.exact else _fmt_mpc(c)
            if mono:
                parts.append(mono if cs == "1" else f"({cs})*{mono}")
            else:
                parts.append(f"({cs})" if not self.exact or "+" in cs[1:] else cs)
        return " + ".join(parts)


def _fmt_mpc(c) -> str:
    re, im = float(c.real), float(c.imag)
    if im == 0:
        return f"{re:.6g}"
    return f"{re:.6g}{im:+.6g}i"


# ---------------------------------------------------------------------------
# dot products
# ---------------------------------------------------------------------------

def dot(pairs: Iterable[tuple[Series, Series]], rel: int, ring: SeriesRing) -> Series:
    """``sum(a * b for a, b in pairs)`` truncated at degree ``rel``."""
    pairs = [(a, b) for a, b in pairs if a._t and b._t]
    if rel < 0:
        return ring.zero(rel)
    if not pairs:
        return ring.zero(rel)
    if ring.exact:
        L = 1
        for a, b in pairs:
            L = _lcm(L, a._den * b._den)
        gaussian = True
        packed = []
        for a, b in pairs:
            ai, bi = a._items(), b._items()
            gaussian = gaussian and a._is_gaussian() and b._is_gaussian()
            packed.append((ai[0], ai[1], bi[0], bi[1], L // (a._den * b._den)))
        acc = kernels.dot_exact(packed, rel, ring.shift, gaussian)
        return Series._exact(ring, acc, L, rel)
    packed = []
    for a, b in pairs:
        ai, bi = a._items(), b._items()
        packed.append((ai[0], ai[1], bi[0], bi[1]))
    return Series._float(ring, kernels.dot_float(packed, rel, ring.shift), rel)


def sum_series(items: Iterable[Series], ring: SeriesRing) -> Series:
    out = None
    for s in items:
        out = s if out is None else out + s
    return ring.zero() if out is None else out


# ---------------------------------------------------------------------------
# named operations
# ---------------------------------------------------------------------------

def _mul_to(a: Series, b: Series, limit: int) -> Series:
    """Product treating both factors as exact polynomials, truncated at limit."""
    return dot([(a, b)], limit, a.ring)


def _inverse_to(f: Series, limit: int) -> Series:
    ring = f.ring
    f0 = f.constant()
    F = ring.field
    if F.is_zero(f0):
        raise NotAUnit("constant term is zero")
    inv0 = (QI2.coerce(f0).inverse() if ring.exact else 1 / f0)
    s = ring.constant(inv0).with_rel(limit)
    m = 0
    one = ring.one()
    while m < limit:
        m = min(2 * m + 1, limit)
        e = (one - _mul_to(f, s, m)).with_rel(m)
        s = (s.with_rel(m) + _mul_to(s, e, m)).with_rel(m)
    return s


def invert_unit(f: Series) -> Series:
    """Multiplicative inverse of a unit, reliable to the same degree as ``f``."""
    if f.rel < 0:
        raise NotAUnit("series carries no reliable coefficients")
    return _inverse_to(f, f.rel)


def conj_series(f: Series) -> Series:
    """Coefficient-wise complex conjugation."""
    return f.conj()


def monomial_content(f: Series) -> tuple[int, ...]:
    """Coordinatewise minimum exponent over the support."""
    if not f._t:
        raise ZeroSeries("the zero series has no monomial content")
    unpack = f.ring.unpack
    it = iter(f._t)
    gamma = list(unpack(next(it)))
    for k in it:
        e = unpack(k)
        for i, a in enumerate(e):
            if a < gamma[i]:
                gamma[i] = a
    return tuple(gamma)


def is_monomial_times_unit(f: Series) -> tuple[bool, tuple[int, ...] | None]:
    """(True, gamma) when f = X^gamma * unit modulo the reliable degree."""
    if not f._t:
        return False, None
    gamma = monomial_content(f)
    if f.ring.pack(gamma) in f._t:
        return True, gamma
    return False, None


def divide_by_monomial(f: Series, gamma: Sequence[int]) -> Series:
    """g with X^gamma * g = f; the reliable degree drops by |gamma|."""
    return f.div_monomial(gamma)


def sqrt_unit(f: Series) -> Series:
    """Square root of a unit by Newton iteration s <- (s + f/s)/2.

    A real positive constant term gets the nonnegative real root; otherwise
    the field square root of the constant term seeds the iteration.
    """
    ring = f.ring
    F = ring.field
    f0 = f.constant()
    if F.is_zero(f0):
        raise NotAUnit("constant term is zero")
    if F.is_real(f0) and F.real_sign(f0) > 0:
        s0 = F.sqrt_nonneg_real(f0)
    else:
        s0 = F.sqrt(f0)
    limit = f.rel
    if limit < 0:
        raise NotAUnit("series carries no reliable coefficients")
    s = ring.constant(s0).with_rel(limit)
    half = F(Fraction(1, 2))
    m = 0
    while m < limit:
        m = min(2 * m + 1, limit)
        q = _mul_to(f, _inverse_to(s.with_rel(m), m), m)
        s = (s.with_rel(m) + q).scale(half).with_rel(m)
    return s


def substitute_monomial_map(f: Series, mapping) -> Series:
    """Compose f with X_i -> mapping[i] (series of order >= 1).

    ``mapping`` is a dict variable index -> Series, or a sequence of Series
    (``None`` entries mean identity).  Monomial targets are substituted term
    by term; general targets go through powers.
    """
    ring = f.ring
    n = ring.nvars
    if not isinstance(mapping, Mapping):
        mapping = {i: t for i, t in enumerate(mapping) if t is not None}
    targets: list[Series] = []
    for i in range(n):
        t = mapping.get(i)
        if t is None:
            t = ring.var(i)
        else:
            ring.check(t)
            if not ring.field.is_zero(t.constant()):
                raise OrderViolation(f"target of {ring.names[i]} has a nonzero constant term")
        targets.append(t)
    mono = []
    for t in targets:
        flag = len(t._t) == 1 and t.rel >= ring.cap
        if flag:
            (k, v), = t._t.items()
            flag = (v == (t._den, 0, 0, 0)) if ring.exact else (v == 1)
        mono.append(flag)
    if all(mono):
        exps = [monomial_content(t) for t in targets]
        out = {}
        for e, c in f.terms.items():
            img = [0] * n
            for a, te in zip(e, exps):
                if a:
                    for j in range(n):
                        img[j] += a * te[j]
            key = tuple(img)
            out[key] = out[key] + c if key in out else c
        # images have degree >= 1, so unknown terms stay above f.rel
        return ring.from_dict(out, rel=f.rel)
    powers: list[list[Series]] = [[ring.one()] for _ in range(n)]
    result = ring.zero()
    for e, c in f.terms.items():
        term = ring.constant(c)
        for i, a in enumerate(e):
            while len(powers[i]) <= a:
                powers[i].append(powers[i][-1] * targets[i])
            if a:
                term = term * powers[i][a]
        result = result + term
    return result.with_rel(min(result.rel, f.rel))

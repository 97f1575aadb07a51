"""Coefficient fields.

Two interchangeable backends are provided:

* :class:`ExactField` -- the field Q(i, sqrt2).  Elements are :class:`QI2`
  values ``(a + b*sqrt2) + (c + d*sqrt2)*i`` with rational ``a, b, c, d``.
* :class:`FloatField` -- complex numbers with ``prec`` bits of mantissa
  (``gmpy2.mpc``) and an absolute zero tolerance ``eps``.

A field object knows how to coerce, conjugate, test for zero and take square
roots of its elements.  Elements themselves support the usual arithmetic
operators.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce

import gmpy2

from mpert.errors import DivisionByZero, NegativeInput, NotASquareInField

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# rational and real-quadratic helpers
# ---------------------------------------------------------------------------

def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def q2_sign(p: Fraction, q: Fraction) -> int:
    """Sign of the real number p + q*sqrt2."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    # opposite signs: compare p^2 with 2 q^2
    big = p * p - 2 * q * q
    s = (big > 0) - (big < 0)
    return s if p > 0 else -s


def q2_sqrt(p: Fraction, q: Fraction) -> tuple[Fraction, Fraction] | None:
    """Nonnegative square root of p + q*sqrt2 inside Q(sqrt2), or None."""
    if q == 0:
        r = rational_sqrt(p)
        if r is not None:
            return r, _ZERO
        s = rational_sqrt(p / 2)
        if s is not None:
            return _ZERO, s
        return None
    # (r + s sqrt2)^2 = r^2 + 2 s^2 + 2 r s sqrt2
    t = rational_sqrt(p * p - 2 * q * q)
    if t is None:
        return None
    for r2 in ((p + t) / 2, (p - t) / 2):
        r = rational_sqrt(r2)
        if r is None or r == 0:
            continue
        s = q / (2 * r)
        if r * r + 2 * s * s == p:
            if q2_sign(r, s) < 0:
                r, s = -r, -s
            return r, s
    return None


def _prime_norm_rep(p: int) -> tuple[int, int, bool] | None:
    """(x, y, uses_sqrt2) with x^2 + y^2 = p, or x^2 + 2y^2 = p when flagged."""
    from sympy.solvers.diophantine.diophantine import cornacchia

    if p == 2:
        return 1, 1, False
    if p % 4 == 1:
        (x, y), = sorted(cornacchia(1, 1, p))[:1]
        return int(x), int(y), False
    if p % 8 == 3:
        (x, y), = sorted(cornacchia(1, 2, p))[:1]
        return int(x), int(y), True
    return None


_FULL_FACTOR_BOUND = 10 ** 24


def _bounded_factor(n: int) -> dict[int, int] | None:
    """Prime factorization of ``n`` with bounded effort, or None.

    Small numbers are factored completely.  Larger ones get trial division
    and succeed only if the cofactor left over is 1, a prime or a square of
    a prime.
    """
    from sympy import factorint, isprime

    if n < _FULL_FACTOR_BOUND:
        return {int(p): int(e) for p, e in factorint(n).items()}
    fac = factorint(n, limit=10 ** 5, use_rho=False, use_pm1=False, use_ecm=False)
    out: dict[int, int] = {}
    for p, e in fac.items():
        p, e = int(p), int(e)
        if p < 10 ** 10 or isprime(p):
            out[p] = out.get(p, 0) + e
            continue
        if p < _FULL_FACTOR_BOUND:
            for q, k in factorint(p).items():
                out[int(q)] = out.get(int(q), 0) + int(k) * e
            continue
        root = math.isqrt(p)
        if root * root == p and isprime(root):
            out[int(root)] = out.get(int(root), 0) + 2 * e
            continue
        return None
    return out


def norm_rep(n: int) -> "QI2 | None":
    """Some z in Q(i, sqrt2) with |z|^2 = n for a positive integer n, or None.

    Even prime powers contribute a rational factor, so Gaussian results are
    preferred.  Odd powers of primes 1 mod 4 and of 2 use Gaussian integers,
    primes 3 mod 8 use x + y*sqrt2*i, and primes 7 mod 8 give None.
    """
    if n <= 0:
        return None
    fac = _bounded_factor(n)
    if fac is None:
        return None
    z = QI2._new(_ONE, _ZERO, _ZERO, _ZERO)
    for p, e in sorted(fac.items()):
        p, e = int(p), int(e)
        if e // 2:
            z = z * (p ** (e // 2))
        if e % 2 == 0:
            continue
        rep = _prime_norm_rep(p)
        if rep is None:
            return None
        x, y, half = rep
        z = z * (QI2(x, 0, 0, y) if half else QI2(x, 0, y, 0))
    return z


def format_q2(p: Fraction, q: Fraction) -> str:
    """Text form ``"p/q"``, ``"r/s*sqrt2"`` or ``"p/q+r/s*sqrt2"``."""
    if not q:
        return str(p)
    tail = f"{q}*sqrt2"
    if not p:
        return tail
    return f"{p}+{tail}" if q > 0 else f"{p}{tail}"


_RAT = r"\d+(?:/\d+)?"
_Q2_RE = re.compile(
    rf"^(?:(?P<p>[+-]?{_RAT})(?:(?P<q>[+-](?:{_RAT})?)\*?sqrt2)?"
    rf"|(?P<r>[+-]?(?:{_RAT})?)\*?sqrt2)$"
)


def _coef(txt: str) -> Fraction:
    if txt in ("", "+"):
        return _ONE
    if txt == "-":
        return -_ONE
    return Fraction(txt)


def parse_q2(text: str) -> tuple[Fraction, Fraction]:
    """Inverse of :func:`format_q2`; also accepts ``"sqrt2"`` and ``"-sqrt2"``."""
    m = _Q2_RE.match(text.replace(" ", ""))
    if m is None:
        raise ValueError(f"bad scalar {text!r}")
    if m.group("r") is not None:
        return _ZERO, _coef(m.group("r"))
    p = Fraction(m.group("p"))
    q = _coef(m.group("q")) if m.group("q") is not None else _ZERO
    return p, q


# ---------------------------------------------------------------------------
# exact elements
# ---------------------------------------------------------------------------

def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


class QI2:
    """Element (a + b*sqrt2) + (c + d*sqrt2)*i of Q(i, sqrt2)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        self.a = _frac(a)
        self.b = _frac(b)
        self.c = _frac(c)
        self.d = _frac(d)

    @classmethod
    def _new(cls, a, b, c, d) -> "QI2":
        obj = object.__new__(cls)
        obj.a, obj.b, obj.c, obj.d = a, b, c, d
        return obj

    @classmethod
    def coerce(cls, x) -> "QI2":
        if isinstance(x, QI2):
            return x
        if isinstance(x, (int, Fraction)):
            return cls._new(Fraction(x), _ZERO, _ZERO, _ZERO)
        if isinstance(x, str):
            return cls._new(*parse_q2(x), _ZERO, _ZERO)
        raise TypeError(f"cannot coerce {type(x).__name__} to an exact scalar")

    # components -------------------------------------------------------
    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    @property
    def real(self) -> "QI2":
        return QI2._new(self.a, self.b, _ZERO, _ZERO)

    @property
    def imag(self) -> "QI2":
        return QI2._new(self.c, self.d, _ZERO, _ZERO)

    def is_real(self) -> bool:
        return self.c == 0 and self.d == 0

    def is_rational(self) -> bool:
        return self.b == 0 and self.c == 0 and self.d == 0

    def has_sqrt2(self) -> bool:
        return self.b != 0 or self.d != 0

    def conjugate(self) -> "QI2":
        return QI2._new(self.a, self.b, -self.c, -self.d)

    def abs2(self) -> "QI2":
        a, b, c, d = self.a, self.b, self.c, self.d
        return QI2._new(a * a + 2 * b * b + c * c + 2 * d * d,
                        2 * (a * b + c * d), _ZERO, _ZERO)

    def __complex__(self) -> complex:
        r2 = math.sqrt(2)
        return complex(float(self.a) + float(self.b) * r2,
                       float(self.c) + float(self.d) * r2)

    def to_mpc(self) -> gmpy2.mpc:
        r2 = gmpy2.sqrt(gmpy2.mpfr(2))
        re = gmpy2.mpfr(gmpy2.mpq(self.a)) + gmpy2.mpfr(gmpy2.mpq(self.b)) * r2
        im = gmpy2.mpfr(gmpy2.mpq(self.c)) + gmpy2.mpfr(gmpy2.mpq(self.d)) * r2
        return gmpy2.mpc(re, im)

    def __abs__(self) -> float:
        return abs(complex(self))

    # arithmetic -------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, QI2):
            return QI2._new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
        if isinstance(o, (int, Fraction)):
            return QI2._new(self.a + o, self.b, self.c, self.d)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QI2._new(-self.a, -self.b, -self.c, -self.d)

    def __pos__(self):
        return self

    def __sub__(self, o):
        if isinstance(o, QI2):
            return QI2._new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
        if isinstance(o, (int, Fraction)):
            return QI2._new(self.a - o, self.b, self.c, self.d)
        return NotImplemented

    def __rsub__(self, o):
        return (-self).__add__(o)

    def __mul__(self, o):
        if isinstance(o, QI2):
            a, b, c, d = self.a, self.b, self.c, self.d
            e, f, g, h = o.a, o.b, o.c, o.d
            if not (b or d or f or h):
                return QI2._new(a * e - c * g, _ZERO, a * g + c * e, _ZERO)
            return QI2._new(
                a * e + 2 * b * f - c * g - 2 * d * h,
                a * f + b * e - c * h - d * g,
                a * g + 2 * b * h + c * e + 2 * d * f,
                a * h + b * g + c * f + d * e,
            )
        if isinstance(o, (int, Fraction)):
            return QI2._new(self.a * o, self.b * o, self.c * o, self.d * o)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "QI2":
        n = self.abs2()
        p, q = n.a, n.b
        den = p * p - 2 * q * q
        if den == 0:
            raise DivisionByZero("division by zero in Q(i, sqrt2)")
        inv_n = QI2._new(p / den, -q / den, _ZERO, _ZERO)
        return self.conjugate() * inv_n

    def __truediv__(self, o):
        if isinstance(o, (int, Fraction)):
            if o == 0:
                raise DivisionByZero("division by zero in Q(i, sqrt2)")
            return QI2._new(self.a / o, self.b / o, self.c / o, self.d / o)
        if isinstance(o, QI2):
            return self * o.inverse()
        return NotImplemented

    def __rtruediv__(self, o):
        if isinstance(o, (int, Fraction)):
            return self.inverse() * o
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = QI2._new(_ONE, _ZERO, _ZERO, _ZERO)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparisons ------------------------------------------------------
    def __eq__(self, o):
        if isinstance(o, QI2):
            return (self.a == o.a and self.b == o.b and self.c == o.c
                    and self.d == o.d)
        if isinstance(o, (int, Fraction)):
            return self.a == o and not (self.b or self.c or self.d)
        return NotImplemented

    def __hash__(self):
        if not (self.b or self.c or self.d):
            return hash(self.a)
        return hash((self.a, self.b, self.c, self.d))

    def __bool__(self):
        return bool(self.a or self.b or self.c or self.d)

    def __repr__(self):
        return f"QI2({self})"

    def __str__(self):
        re = format_q2(self.a, self.b)
        if not (self.c or self.d):
            return re
        im = format_q2(self.c, self.d)
        if not (self.a or self.b):
            return f"({im})*i"
        return f"{re}+({im})*i"


SQRT2 = QI2(0, 1)
I = QI2(0, 0, 1)


# ---------------------------------------------------------------------------
# field objects
# ---------------------------------------------------------------------------

_GRID = tuple(QI2(m, n) for m in range(4) for n in range(-3, 4) if m or n)


def _two_squares(r: QI2, hints=()) -> QI2 | None:
    """x + y*i with x^2 + y^2 = r and x, y in Q(sqrt2), by bounded search."""
    seen = set()
    for x in tuple(hints) + _GRID:
        x = QI2.coerce(x)
        if not x.is_real() or x in seen:
            continue
        seen.add(x)
        rest = r - x * x
        if q2_sign(rest.a, rest.b) < 0:
            continue
        y = q2_sqrt(rest.a, rest.b)
        if y is not None:
            return QI2._new(x.a, x.b, y[0], y[1])
    return None


class ExactField:
    """The field Q(i, sqrt2) with literal zero tests."""

    exact = True
    name = "exact"

    def __call__(self, x) -> QI2:
        if isinstance(x, gmpy2.mpc().__class__):
            raise TypeError("cannot convert a float to an exact scalar")
        return QI2.coerce(x)

    def __eq__(self, other):
        return isinstance(other, ExactField)

    def __hash__(self):
        return hash("exact")

    def __repr__(self):
        return "ExactField()"

    @property
    def zero(self) -> QI2:
        return QI2()

    @property
    def one(self) -> QI2:
        return QI2(1)

    @property
    def i(self) -> QI2:
        return I

    def is_zero(self, x, scale=None) -> bool:
        return not x

    def conj(self, x: QI2) -> QI2:
        return x.conjugate()

    def is_real(self, x: QI2) -> bool:
        return x.is_real()

    def abs2(self, x: QI2) -> QI2:
        return x.abs2()

    def magnitude(self, x: QI2) -> float:
        return abs(complex(x))

    def real_sign(self, x: QI2) -> int:
        """Sign of a real element."""
        return q2_sign(x.a, x.b)

    def sqrt_nonneg_real(self, x) -> QI2:
        x = self(x)
        if not x.is_real():
            raise NotASquareInField(f"{x} is not real")
        if q2_sign(x.a, x.b) < 0:
            raise NegativeInput(f"{x} is negative")
        root = q2_sqrt(x.a, x.b)
        if root is None:
            raise NotASquareInField(f"{x} has no square root in Q(i, sqrt2)")
        return QI2._new(root[0], root[1], _ZERO, _ZERO)

    def sqrt(self, x) -> QI2:
        """A square root of ``x`` in Q(i, sqrt2) (principal branch when real)."""
        x = self(x)
        if x.is_real():
            if q2_sign(x.a, x.b) >= 0:
                return self.sqrt_nonneg_real(x)
            return self.sqrt_nonneg_real(-x) * I
        # sqrt(z) = sqrt((|z| + re)/2) + i sgn(im) sqrt((|z| - re)/2)
        mod = self.sqrt_nonneg_real(x.abs2())
        re, im = x.real, x.imag
        p = self.sqrt_nonneg_real((mod + re) / 2)
        q = self.sqrt_nonneg_real((mod - re) / 2)
        if q2_sign(im.a, im.b) < 0:
            q = -q
        return p + q * I

    def norm_preimage(self, r, hints=()) -> QI2 | None:
        """Some ``z`` with ``|z|^2 = r`` for a positive real ``r``, or None.

        Tries a real square root first, then a factorization of the rational
        ``r`` into norms of Gaussian primes and of ``x + y*sqrt2*i``, then
        ``r = x^2 + y^2`` with x drawn from ``hints`` (real elements) or a
        small grid of Z[sqrt2].
        """
        r = self(r)
        if not r.is_real() or q2_sign(r.a, r.b) <= 0:
            return None
        root = q2_sqrt(r.a, r.b)
        if root is not None:
            return QI2._new(root[0], root[1], _ZERO, _ZERO)
        if r.b == 0:
            num, den = r.a.numerator, r.a.denominator
            z = norm_rep(num * den)
            if z is not None:
                return z / den
        return _two_squares(r, hints)

    def to_mpc(self, x: QI2) -> gmpy2.mpc:
        return x.to_mpc()


class FloatField:
    """Complex numbers with ``prec`` bits and absolute zero tolerance ``eps``.

    The working precision is process global (it is installed in the gmpy2
    context by :meth:`activate`), so only one precision should be active at a
    time in a thread.
    """

    exact = False
    name = "float"

    def __init__(self, prec: int = 256, eps=None):
        self.prec = int(prec)
        self.activate()
        if eps is None:
            eps = gmpy2.mpfr(2) ** -128
        self.eps = gmpy2.mpfr(eps)
        self._eps2 = self.eps * self.eps

    def activate(self) -> None:
        ctx = gmpy2.get_context()
        if ctx.precision != self.prec:
            ctx.precision = self.prec

    def __eq__(self, other):
        return (isinstance(other, FloatField) and self.prec == other.prec
                and self.eps == other.eps)

    def __hash__(self):
        return hash(("float", self.prec))

    def __repr__(self):
        return f"FloatField(prec={self.prec}, eps={float(self.eps):.3g})"

    def __call__(self, x) -> gmpy2.mpc:
        if isinstance(x, QI2):
            return x.to_mpc()
        if isinstance(x, Fraction):
            return gmpy2.mpc(gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator)))
        if isinstance(x, str):
            return gmpy2.mpc(gmpy2.mpfr(x.strip()))
        return gmpy2.mpc(x)

    @property
    def zero(self):
        return gmpy2.mpc(0)

    @property
    def one(self):
        return gmpy2.mpc(1)

    @property
    def i(self):
        return gmpy2.mpc(0, 1)

    def is_zero(self, x, scale=None) -> bool:
        tol2 = self._eps2
        if scale is not None and scale > 1:
            tol2 = tol2 * scale * scale
        return gmpy2.norm(x) <= tol2

    def conj(self, x):
        return x.conjugate()

    def is_real(self, x) -> bool:
        return abs(x.imag) <= self.eps

    def abs2(self, x):
        return gmpy2.mpc(gmpy2.norm(x))

    def magnitude(self, x) -> float:
        return float(abs(x))

    def real_sign(self, x) -> int:
        re = x.real
        if abs(re) <= self.eps:
            return 0
        return 1 if re > 0 else -1

    def sqrt_nonneg_real(self, x):
        x = self(x)
        if abs(x.imag) > self.eps:
            raise NotASquareInField(f"{x} is not real")
        if x.real < -self.eps:
            raise NegativeInput(f"{x} is negative")
        re = x.real if x.real > 0 else gmpy2.mpfr(0)
        return gmpy2.mpc(gmpy2.sqrt(re))

    def sqrt(self, x):
        return gmpy2.sqrt(self(x))

    def norm_preimage(self, r, hints=()):
        return self.sqrt_nonneg_real(r)

    def to_mpc(self, x):
        return x


def gcd_many(values) -> int:
    return reduce(math.gcd, values, 0)

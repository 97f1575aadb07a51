"""Matrices with truncated power series entries."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from mpert.errors import DimensionMismatch, NotSquare
from mpert.series import Series, SeriesRing, dot


class SeriesMatrix:
    """A ``rows x cols`` grid of :class:`Series` over one ring."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: SeriesRing, entries: Sequence[Sequence[Series]]):
        self.ring = ring
        self.entries = [list(r) for r in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        for r in self.entries:
            if len(r) != self.cols:
                raise DimensionMismatch("ragged matrix rows")
            for s in r:
                ring.check(s)

    # constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, ring: SeriesRing, p: int, q: int) -> "SeriesMatrix":
        z = ring.zero()
        return cls(ring, [[z] * q for _ in range(p)])

    @classmethod
    def identity(cls, ring: SeriesRing, d: int) -> "SeriesMatrix":
        z, o = ring.zero(), ring.one()
        return cls(ring, [[o if i == j else z for j in range(d)] for i in range(d)])

    @classmethod
    def diag(cls, ring: SeriesRing, items: Sequence[Series]) -> "SeriesMatrix":
        d = len(items)
        z = ring.zero()
        return cls(ring, [[items[i] if i == j else z for j in range(d)] for i in range(d)])

    @classmethod
    def from_constants(cls, ring: SeriesRing, M) -> "SeriesMatrix":
        return cls(ring, [[ring.constant(c) for c in row] for row in M])

    @classmethod
    def block_diag(cls, A: "SeriesMatrix", B: "SeriesMatrix") -> "SeriesMatrix":
        ring = A.ring
        z = ring.zero()
        rows = [list(r) + [z] * B.cols for r in A.entries]
        rows += [[z] * A.cols + list(r) for r in B.entries]
        return cls(ring, rows)

    # accessors ------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def _square(self) -> int:
        if self.rows != self.cols:
            raise NotSquare(f"matrix is {self.rows}x{self.cols}")
        return self.rows

    @property
    def rel(self) -> int:
        return min((s.rel for r in self.entries for s in r), default=self.ring.cap)

    def constant(self) -> list[list]:
        return [[s.constant() for s in r] for r in self.entries]

    def block(self, rows: range, cols: range) -> "SeriesMatrix":
        return SeriesMatrix(self.ring, [[self.entries[i][j] for j in cols] for i in rows])

    def map(self, fn) -> "SeriesMatrix":
        return SeriesMatrix(self.ring, [[fn(s) for s in r] for r in self.entries])

    def is_zero(self) -> bool:
        return all(s.is_zero() for r in self.entries for s in r)

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb))

    def __repr__(self):
        return f"SeriesMatrix({self.rows}x{self.cols}, {self.entries!r})"

    def __str__(self):
        return "[" + ",\n ".join("[" + ", ".join(str(s) for s in r) + "]"
                                 for r in self.entries) + "]"

    def max_abs(self) -> float:
        return max((s.max_abs() for r in self.entries for s in r), default=0.0)

    def max_abs_mp(self):
        import gmpy2

        return max((s.max_abs_mp() for r in self.entries for s in r), default=gmpy2.mpfr(0))

    # algebra --------------------------------------------------------------
    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return SeriesMatrix(self.ring, [[a + b for a, b in zip(ra, rb)]
                                        for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot subtract {self.shape} and {other.shape}")
        return SeriesMatrix(self.ring, [[a - b for a, b in zip(ra, rb)]
                                        for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda s: -s)

    def scale(self, c) -> "SeriesMatrix":
        if isinstance(c, Series):
            return self.map(lambda s: s * c)
        return self.map(lambda s: s.scale(c))

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return matmul(self, other)

    def adjoint(self) -> "SeriesMatrix":
        return adjoint(self)

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix(self.ring, [[self.entries[i][j] for i in range(self.rows)]
                                        for j in range(self.cols)])

    def conj(self) -> "SeriesMatrix":
        return self.map(lambda s: s.conj())

    def trace(self) -> Series:
        d = self._square()
        out = self.ring.zero()
        for i in range(d):
            out = out + self.entries[i][i]
        return out

    def truncate(self, degree: int) -> "SeriesMatrix":
        return self.map(lambda s: s.truncate(degree))

    def homogeneous(self, k: int) -> "SeriesMatrix":
        return self.map(lambda s: s.homogeneous(k))

    def mul_monomial(self, exp) -> "SeriesMatrix":
        return self.map(lambda s: s.mul_monomial(exp))

    def div_monomial(self, exp) -> "SeriesMatrix":
        return self.map(lambda s: s.div_monomial(exp))

    def is_real(self) -> bool:
        return all(s.is_real() for r in self.entries for s in r)

    def to_field(self, ring: SeriesRing) -> "SeriesMatrix":
        """Convert every entry into ``ring`` (e.g. exact -> float)."""
        return SeriesMatrix(ring, [[s.to_field(ring) for s in r] for r in self.entries])


def matmul(A: SeriesMatrix, B: SeriesMatrix, limit: int | None = None) -> SeriesMatrix:
    """Matrix product; ``limit`` optionally truncates every entry."""
    if A.cols != B.rows:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    ring = A.ring
    cap = ring.cap
    out = []
    Bcols = [[B.entries[l][j] for l in range(B.rows)] for j in range(B.cols)]
    for i in range(A.rows):
        Ai = A.entries[i]
        row = []
        for j in range(B.cols):
            Bj = Bcols[j]
            rel = cap if limit is None else min(cap, limit)
            for a, b in zip(Ai, Bj):
                r = a.product_rel(b)
                if r < rel:
                    rel = r
            row.append(dot(zip(Ai, Bj), rel, ring))
        out.append(row)
    return SeriesMatrix(ring, out)


def adjoint(A: SeriesMatrix) -> SeriesMatrix:
    """Conjugate transpose."""
    return SeriesMatrix(A.ring, [[A.entries[i][j].conj() for i in range(A.rows)]
                                 for j in range(A.cols)])


def _float_scale(A: SeriesMatrix):
    return max(1.0, A.max_abs())


def _vanishes(M: SeriesMatrix, scale: float = 1.0) -> bool:
    F = M.ring.field
    if F.exact:
        return M.is_zero()
    tol = F.eps * scale * scale * max(1, M.rows) * 16
    return all(s.max_abs_mp() <= tol for r in M.entries for s in r)


def is_normal(A: SeriesMatrix) -> bool:
    """A A* = A* A modulo the reliable degree (tolerance-scaled on floats)."""
    A._square()
    Ah = adjoint(A)
    return _vanishes(matmul(A, Ah) - matmul(Ah, A), _float_scale(A))


def is_unitary(U: SeriesMatrix) -> bool:
    """U U* = U* U = I modulo the reliable degree."""
    d = U._square()
    I = SeriesMatrix.identity(U.ring, d)
    Uh = adjoint(U)
    s = _float_scale(U)
    return _vanishes(matmul(U, Uh) - I, s) and _vanishes(matmul(Uh, U) - I, s)


@dataclass(frozen=True)
class CharPoly:
    """Monic ``Z^d + c_1 Z^(d-1) + ... + c_d``; ``coeffs[i-1]`` is ``c_i``."""

    degree: int
    coeffs: tuple

    def c(self, i: int) -> Series:
        return self.coeffs[i - 1]

    def last_nonzero(self) -> tuple[int, Series] | None:
        for i in range(self.degree, 0, -1):
            if not self.coeffs[i - 1].is_zero():
                return i, self.coeffs[i - 1]
        return None


def char_poly(A: SeriesMatrix) -> CharPoly:
    """Characteristic polynomial by the Faddeev-LeVerrier recurrence."""
    d = A._square()
    ring = A.ring
    coeffs = []
    M = SeriesMatrix.zeros(ring, d, d)
    prev = ring.one()
    for k in range(1, d + 1):
        M = matmul(A, M)
        M = SeriesMatrix(ring, [[(M.entries[i][j] + prev) if i == j else M.entries[i][j]
                                 for j in range(d)] for i in range(d)])
        ck = matmul(A, M).trace().scale(Fraction(-1, k))
        coeffs.append(ck)
        prev = ck
    return CharPoly(d, tuple(coeffs))


def determinant(A: SeriesMatrix) -> Series:
    """Determinant by Laplace expansion along rows, memoized on column subsets."""
    d = A._square()
    ring = A.ring
    if d == 0:
        return ring.one()
    memo: dict = {}

    def minor(k: int, cols: tuple) -> Series:
        # determinant of rows k.. and the given columns
        if k == d:
            return ring.one()
        key = (k, cols)
        hit = memo.get(key)
        if hit is not None:
            return hit
        pairs = []
        signs = []
        for pos, c in enumerate(cols):
            entry = A.entries[k][c]
            if entry.is_zero():
                continue
            sub = minor(k + 1, cols[:pos] + cols[pos + 1:])
            pairs.append((entry, sub))
            signs.append(pos % 2)
        plus = [p for p, s in zip(pairs, signs) if not s]
        minus = [p for p, s in zip(pairs, signs) if s]
        out = _dot_rel(plus, ring) - _dot_rel(minus, ring)
        memo[key] = out
        return out

    return minor(0, tuple(range(d)))


def _dot_rel(pairs, ring) -> Series:
    rel = ring.cap
    for a, b in pairs:
        rel = min(rel, a.product_rel(b))
    return dot(pairs, rel, ring)


def power_sums(A: SeriesMatrix, kmax: int) -> list[Series]:
    """p_0 = d and p_k = trace(A^k) for k <= kmax."""
    d = A._square()
    ring = A.ring
    out = [ring.constant(d)]
    P = None
    for k in range(1, kmax + 1):
        P = A if P is None else matmul(P, A)
        out.append(P.trace())
    return out

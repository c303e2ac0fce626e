"""Exact dyadic-rational arithmetic, dyadic boxes, and Haar functions.

A dyadic rational is a number a / 2^k with integer a and k >= 0.  Point
coordinates, Haar coefficients, and box endpoints throughout the package
are dyadic, so every sum and product here is exact: no floating point is
involved until a final norm value is reported.

Conventions for the anisotropic index (j, m):

* per-coordinate level j_k >= -1, with j_k = -1 denoting the whole
  interval [0, 1) (the constant function),
* position 0 <= m_k < 2^{max(j_k, 0)},
* order(j) = sum_k max(j_k, 0), so the box of index (j, m) has volume
  exactly 2^{-order(j)},
* the Haar function of level j >= 0 is +1 on the left half of its box,
  -1 on the right half, 0 outside; level -1 is the constant 1.  Haar
  functions are normalized in the sup norm, not in L2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence

from .errors import DomainError


class DyadicRational:
    """Immutable exact number a / 2^k, kept in lowest terms.

    Canonical form: the numerator is odd whenever the exponent is
    positive, and the exponent is 0 when the numerator is 0.  Equality
    and hashing are structural, which canonicalization makes semantic.
    """

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        if exp < 0:
            raise ValueError("exponent must be >= 0 (value = num / 2^exp)")
        if num == 0:
            exp = 0
        else:
            while exp > 0 and num % 2 == 0:
                num //= 2
                exp -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    # -- arithmetic (always exact) --------------------------------------

    def __add__(self, other: "DyadicRational") -> "DyadicRational":
        other = _coerce(other)
        if self.exp >= other.exp:
            return DyadicRational(self.num + (other.num << (self.exp - other.exp)), self.exp)
        return DyadicRational((self.num << (other.exp - self.exp)) + other.num, other.exp)

    __radd__ = __add__

    def __sub__(self, other: "DyadicRational") -> "DyadicRational":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "DyadicRational":
        return _coerce(other) + (-self)

    def __mul__(self, other: "DyadicRational") -> "DyadicRational":
        other = _coerce(other)
        return DyadicRational(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __neg__(self) -> "DyadicRational":
        return DyadicRational(-self.num, self.exp)

    def __abs__(self) -> "DyadicRational":
        return DyadicRational(abs(self.num), self.exp)

    # -- comparisons -----------------------------------------------------

    def _cmp_key(self, other: "DyadicRational") -> tuple[int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = DyadicRational(other)
        if not isinstance(other, DyadicRational):
            return NotImplemented
        return self.num == other.num and self.exp == other.exp

    def __lt__(self, other) -> bool:
        a, b = self._cmp_key(_coerce(other))
        return a < b

    def __le__(self, other) -> bool:
        a, b = self._cmp_key(_coerce(other))
        return a <= b

    def __gt__(self, other) -> bool:
        a, b = self._cmp_key(_coerce(other))
        return a > b

    def __ge__(self, other) -> bool:
        a, b = self._cmp_key(_coerce(other))
        return a >= b

    def __hash__(self) -> int:
        return hash((self.num, self.exp))

    # -- conversions -----------------------------------------------------

    def __float__(self) -> float:
        return self.num / (1 << self.exp) if self.exp < 1024 else float(self.as_fraction())

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def scaled_num(self, exp: int) -> int:
        """Numerator at the fixed exponent ``exp`` (must be >= self.exp)."""
        if exp < self.exp:
            raise ValueError("target exponent too small for exact scaling")
        return self.num << (exp - self.exp)

    def __repr__(self) -> str:
        return f"{self.num}/2^{self.exp}" if self.exp else str(self.num)

    @classmethod
    def parse(cls, text: str) -> "DyadicRational":
        """Parse 'a/2^k' or a bare integer."""
        text = text.strip()
        if "/" in text:
            num_s, den_s = text.split("/", 1)
            if not den_s.startswith("2^"):
                raise ValueError(f"denominator must be a power of two: {text!r}")
            return cls(int(num_s), int(den_s[2:]))
        return cls(int(text))


def _coerce(x) -> DyadicRational:
    if isinstance(x, DyadicRational):
        return x
    if isinstance(x, int):
        return DyadicRational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to DyadicRational")


ZERO = DyadicRational(0)
ONE = DyadicRational(1)
HALF = DyadicRational(1, 1)


@dataclass(frozen=True)
class DyadicIndex:
    """Anisotropic Haar/box index: levels j (entries >= -1) and positions m."""

    j: tuple[int, ...]
    m: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "j", tuple(self.j))
        object.__setattr__(self, "m", tuple(self.m))
        if len(self.j) != len(self.m):
            raise DomainError("j and m must have the same length")
        for jk, mk in zip(self.j, self.m):
            if jk < -1:
                raise DomainError(f"level {jk} < -1")
            if not 0 <= mk < (1 << max(jk, 0)):
                raise DomainError(f"position {mk} out of range for level {jk}")

    @property
    def d(self) -> int:
        return len(self.j)

    @property
    def order(self) -> int:
        return sum(max(jk, 0) for jk in self.j)


@dataclass(frozen=True)
class DyadicBox:
    """Half-open box with dyadic endpoints, one [lower_k, upper_k) per axis."""

    lower: tuple[DyadicRational, ...]
    upper: tuple[DyadicRational, ...]

    @property
    def d(self) -> int:
        return len(self.lower)

    def volume(self) -> DyadicRational:
        v = ONE
        for lo, hi in zip(self.lower, self.upper):
            v = v * (hi - lo)
        return v

    def contains(self, x: Sequence[DyadicRational]) -> bool:
        return all(lo <= xk < hi for lo, xk, hi in zip(self.lower, x, self.upper))


def box_of(index: DyadicIndex) -> DyadicBox:
    """The box of ``index``: the product of [2^{-j} m, 2^{-j}(m+1)), with
    level -1 mapping to [0, 1)."""
    lower = []
    upper = []
    for jk, mk in zip(index.j, index.m):
        level = max(jk, 0)
        lower.append(DyadicRational(mk, level))
        upper.append(DyadicRational(mk + 1, level))
    return DyadicBox(tuple(lower), tuple(upper))


def haar_eval_1d(j: int, m: int, x: DyadicRational) -> int:
    """One-dimensional Haar value in {-1, 0, +1} at x in [0, 1)."""
    if j == -1:
        return 1 if ZERO <= x < ONE else 0
    lo = DyadicRational(m, j)
    mid = DyadicRational(2 * m + 1, j + 1)
    hi = DyadicRational(m + 1, j)
    if x < lo or x >= hi:
        return 0
    return 1 if x < mid else -1


def haar_eval(index: DyadicIndex, x: Sequence[DyadicRational]) -> int:
    """Tensor-product Haar value at a point of [0, 1)^d."""
    if len(x) != index.d:
        raise DomainError("point dimension does not match index")
    out = 1
    for jk, mk, xk in zip(index.j, index.m, x):
        out *= haar_eval_1d(jk, mk, xk)
        if out == 0:
            return 0
    return out


def enumerate_shapes(d: int, order: int) -> list[tuple[int, ...]]:
    """All level vectors in N_0^d with given total order.

    The count is C(order + d - 1, d - 1), which grows like order^{d-1}.
    """
    if d < 1:
        raise DomainError("dimension must be >= 1")
    if order < 0:
        raise DomainError("order must be >= 0")
    return list(_compositions(d, order))


def _compositions(d: int, total: int) -> Iterator[tuple[int, ...]]:
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(d - 1, total - first):
            yield (first,) + rest


def shape_count(d: int, order: int) -> int:
    """Number of level vectors in N_0^d with the given total order."""
    return comb(order + d - 1, d - 1)


def positions(shape: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All position vectors m admissible for a level vector."""
    if not shape:
        yield ()
        return
    head = shape[0]
    rest = shape[1:]
    for mk in range(1 << max(head, 0)):
        for tail in positions(rest):
            yield (mk,) + tail

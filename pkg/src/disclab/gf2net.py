"""F2 linear algebra, digital construction of point sets, and net verification.

A binary digital net is built from d generating matrices of shape
(sigma * n) x n over F2: point nu (0 <= nu < 2^n) has i-th coordinate

    x_i = sum_l (C_i nubar)_l * 2^{-l},

where nubar is the vector of binary digits of nu, least significant
first.  Coordinates are exact dyadic rationals with sigma * n bits.

The quality parameter t of an order-sigma net: every admissible row
selection must be linearly independent over F2.  A selection picks, per
matrix, row indices lambda_{i,1} > lambda_{i,2} > ... >= 1, and is
admissible when the sum of the largest min(eta_i, sigma) indices over
all matrices is at most sigma*n - t.  Larger row indices correspond to
less significant output digits, so the weight measures digit depth.

Verification enumerates only the maximal admissible selections: for a
choice of "counted" indices (at most sigma per matrix), every index
below the smallest counted one can be added for free, and any admissible
selection is a subset of such a filled one with equal weight.  Matrices
are stored as int bitmasks (bit c of a row multiplies digit nu_c), and
independence is checked by bitwise Gaussian elimination.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .dyadic import DyadicRational
from .errors import DomainError, ParseError, ResourceLimitError

DEFAULT_RANK_BUDGET = 10**8


@dataclass(frozen=True)
class F2Matrix:
    """Bit matrix over F2; row bitmasks with bit c = column for digit nu_c."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        for r in self.rows:
            if r < 0 or r >> self.cols:
                raise DomainError(f"row 0b{r:b} does not fit in {self.cols} columns")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(tuple(1 << c for c in range(n)), n)

    @classmethod
    def reversal(cls, n: int) -> "F2Matrix":
        """Anti-diagonal matrix: row l picks digit n - l (1-based)."""
        return cls(tuple(1 << (n - 1 - c) for c in range(n)), n)

    @classmethod
    def zero(cls, n_rows: int, cols: int) -> "F2Matrix":
        return cls((0,) * n_rows, cols)

    @classmethod
    def from_bit_lists(cls, bit_rows: Sequence[Sequence[int]], cols: int) -> "F2Matrix":
        rows = []
        for br in bit_rows:
            if len(br) != cols:
                raise DomainError("row length does not match column count")
            rows.append(sum(b << c for c, b in enumerate(br)))
        return cls(tuple(rows), cols)

    def bit(self, row: int, col: int) -> int:
        """Entry at 1-based (row, col)."""
        return (self.rows[row - 1] >> (col - 1)) & 1


@dataclass(frozen=True)
class DigitalNetSpec:
    """Generating-matrix description of a digital net over F2."""

    d: int
    n: int
    sigma: int
    matrices: tuple[F2Matrix, ...]
    t: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if self.d < 1 or self.n < 1 or self.sigma < 1:
            raise DomainError("need d >= 1, n >= 1, sigma >= 1")
        if len(self.matrices) != self.d:
            raise DomainError(f"expected {self.d} matrices, got {len(self.matrices)}")
        for mat in self.matrices:
            if mat.cols != self.n or mat.n_rows != self.sigma * self.n:
                raise DomainError(
                    f"matrix shape {mat.n_rows}x{mat.cols}, expected {self.sigma * self.n}x{self.n}"
                )
        if self.t is not None and not 0 <= self.t <= self.sigma * self.n:
            raise DomainError("t out of range [0, sigma*n]")


class PointSet:
    """Finite point set in [0,1)^d with fixed-point dyadic coordinates.

    Coordinates are stored as integer numerators at the common exponent
    ``precision_bits``; ``points`` exposes them as DyadicRational tuples.
    """

    __slots__ = ("d", "precision_bits", "coords")

    def __init__(self, d: int, precision_bits: int, coords: Sequence[tuple[int, ...]]):
        if d < 1:
            raise DomainError("dimension must be >= 1")
        if precision_bits < 0:
            raise DomainError("precision_bits must be >= 0")
        cap = 1 << precision_bits
        for pt in coords:
            if len(pt) != d:
                raise DomainError("point dimension mismatch")
            for a in pt:
                if not 0 <= a < cap:
                    raise DomainError("coordinate outside [0, 1)")
        self.d = d
        self.precision_bits = precision_bits
        self.coords = [tuple(pt) for pt in coords]

    @property
    def n_points(self) -> int:
        return len(self.coords)

    @property
    def points(self) -> list[tuple[DyadicRational, ...]]:
        p = self.precision_bits
        return [tuple(DyadicRational(a, p) for a in pt) for pt in self.coords]

    @classmethod
    def from_rationals(cls, pts: Sequence[Sequence[DyadicRational]], precision_bits: int | None = None) -> "PointSet":
        if not pts:
            raise DomainError("empty point set")
        d = len(pts[0])
        if precision_bits is None:
            precision_bits = max((x.exp for pt in pts for x in pt), default=0)
        coords = [tuple(x.scaled_num(precision_bits) for x in pt) for pt in pts]
        return cls(d, precision_bits, coords)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PointSet)
            and self.d == other.d
            and self.precision_bits == other.precision_bits
            and self.coords == other.coords
        )


def digital_points(spec: DigitalNetSpec) -> PointSet:
    """All 2^n points of the digital net, in index order nu = 0, 1, ..."""
    n, sig = spec.n, spec.sigma
    p_bits = sig * n
    coords = []
    row_lists = [mat.rows for mat in spec.matrices]
    for nu in range(1 << n):
        pt = []
        for rows in row_lists:
            num = 0
            for l, row in enumerate(rows, start=1):
                if (row & nu).bit_count() & 1:
                    num |= 1 << (p_bits - l)
            pt.append(num)
        coords.append(tuple(pt))
    return PointSet(spec.d, p_bits, coords)


def gf2_independent(rows: Iterable[int]) -> bool:
    """Whether the given bitmask rows are linearly independent over F2."""
    basis: dict[int, int] = {}
    for r in rows:
        cur = r
        while cur:
            lead = cur.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                basis[lead] = cur
                break
            cur ^= b
        else:
            return False
    return True


def gf2_rank(rows: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for r in rows:
        cur = r
        while cur:
            lead = cur.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                basis[lead] = cur
                break
            cur ^= b
    return len(basis)


def _coordinate_selections(sigma: int, max_rows: int, budget_w: int) -> list[tuple[int, tuple[int, ...]]]:
    """Maximal admissible row selections for one matrix, as (weight, rows).

    Counted indices are a descending tuple of size <= sigma with sum <=
    budget_w; a full-size tuple absorbs every smaller index for free.
    """
    out: list[tuple[int, tuple[int, ...]]] = [(0, ())]
    indices = range(1, max_rows + 1)
    for size in range(1, sigma + 1):
        for combo in itertools.combinations(indices, size):
            w = sum(combo)
            if w > budget_w:
                continue
            if size == sigma:
                fill = tuple(range(1, combo[0]))
                out.append((w, fill + combo))
            else:
                out.append((w, combo))
    return out


def verify_net_order(
    spec: DigitalNetSpec,
    sigma: int | None = None,
    t: int = 0,
    budget: int = DEFAULT_RANK_BUDGET,
) -> bool:
    """Exhaustively check the order-``sigma`` net property at parameter t.

    When ``sigma`` is smaller than the declared order of ``spec``, only
    the first sigma*n rows of each matrix take part (the standard
    order-downgrade view of a higher-order net).
    """
    if sigma is None:
        sigma = spec.sigma
    if sigma < 1 or sigma > spec.sigma:
        raise DomainError("sigma must be in [1, spec.sigma]")
    n = spec.n
    max_rows = sigma * n
    if not 0 <= t <= max_rows:
        raise DomainError("t out of range [0, sigma*n]")
    budget_w = max_rows - t
    per_coord = _coordinate_selections(sigma, max_rows, budget_w)
    per_coord.sort()

    mats = [mat.rows[:max_rows] for mat in spec.matrices]
    work = 0

    def recurse(i: int, remaining: int, chosen_rows: list[int]) -> bool:
        nonlocal work
        if i == spec.d:
            work += 1
            if work > budget:
                raise ResourceLimitError(
                    f"net verification exceeded budget of {budget} rank checks"
                )
            return gf2_independent(chosen_rows)
        for w, sel in per_coord:
            if w > remaining:
                break  # sorted by weight
            rows = [mats[i][l - 1] for l in sel]
            if not recurse(i + 1, remaining - w, chosen_rows + rows):
                return False
        return True

    return recurse(0, budget_w, [])


def minimal_t(spec: DigitalNetSpec, sigma: int | None = None, budget: int = DEFAULT_RANK_BUDGET) -> int:
    """Smallest t for which the order-``sigma`` net property holds.

    Well-defined because the property is monotone in t and always holds
    at t = sigma*n, where no selection is admissible.
    """
    if sigma is None:
        sigma = spec.sigma
    for t in range(sigma * spec.n + 1):
        if verify_net_order(spec, sigma, t, budget=budget):
            return t
    raise AssertionError("unreachable: property holds at t = sigma*n")


def interlace(base: DigitalNetSpec, sigma: int) -> DigitalNetSpec:
    """Digit-interlace an order-1 net in sigma*d dimensions down to d.

    Output matrix i takes its row (l-1)*sigma + u from row l of base
    matrix (i-1)*sigma + u: the output digits of sigma consecutive base
    coordinates are interleaved into one coordinate.
    """
    if sigma < 1:
        raise DomainError("sigma must be >= 1")
    if base.sigma != 1:
        raise DomainError("interlacing expects an order-1 base net")
    if base.d % sigma:
        raise DomainError(f"base dimension {base.d} not divisible by sigma={sigma}")
    if sigma == 1:
        return base
    d_out = base.d // sigma
    n = base.n
    matrices = []
    for i in range(d_out):
        rows = []
        for l in range(n):
            for u in range(sigma):
                rows.append(base.matrices[i * sigma + u].rows[l])
        matrices.append(F2Matrix(tuple(rows), n))
    return DigitalNetSpec(d_out, n, sigma, tuple(matrices))


def box_point_counts(ps: PointSet, shape: Sequence[int]) -> dict[tuple[int, ...], int]:
    """Count points per dyadic box of the given per-coordinate levels.

    Levels above the coordinate precision are allowed; boxes that contain
    no point are omitted, and the returned counts sum to the point count.
    """
    if len(shape) != ps.d:
        raise DomainError("shape dimension mismatch")
    for jk in shape:
        if jk < -1:
            raise DomainError("levels must be >= -1")
    p = ps.precision_bits
    counts: dict[tuple[int, ...], int] = {}
    for pt in ps.coords:
        key = []
        for jk, a in zip(shape, pt):
            if jk <= 0:
                key.append(0)  # floor(x * 2^j) = 0 on [0,1) for j in {-1, 0}
            elif jk <= p:
                key.append(a >> (p - jk))
            else:
                key.append(a << (jk - p))
        k = tuple(key)
        counts[k] = counts.get(k, 0) + 1
    return counts


# -- file formats ---------------------------------------------------------

def write_matrices(spec: DigitalNetSpec) -> str:
    """Matrix file: header "d n sigma", then per matrix sigma*n lines of n
    characters; line l is row l (most significant output digit first), and
    the c-th character multiplies binary digit nu_{c-1} of the point index.
    """
    lines = [f"{spec.d} {spec.n} {spec.sigma}"]
    for mat in spec.matrices:
        for row in mat.rows:
            lines.append("".join(str((row >> c) & 1) for c in range(spec.n)))
    return "\n".join(lines) + "\n"


def read_matrices(text: str) -> DigitalNetSpec:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty matrix file", line=1)
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError("expected header 'd n sigma'", line=1)
    try:
        d, n, sigma = (int(x) for x in head)
    except ValueError:
        raise ParseError("non-integer header field", line=1) from None
    if d < 1 or n < 1 or sigma < 1:
        raise ParseError("header values must be positive", line=1)
    need = d * sigma * n
    body = [ln.strip() for ln in lines[1:] if ln.strip()]
    if len(body) != need:
        raise ParseError(
            f"expected {need} matrix rows, found {len(body)}", line=len(lines)
        )
    matrices = []
    ln_no = 2
    for i in range(d):
        rows = []
        for _ in range(sigma * n):
            row_s = body[i * sigma * n + len(rows)]
            if len(row_s) != n or set(row_s) - {"0", "1"}:
                raise ParseError(f"bad matrix row {row_s!r}", line=ln_no)
            rows.append(sum((row_s[c] == "1") << c for c in range(n)))
            ln_no += 1
        matrices.append(F2Matrix(tuple(rows), n))
    return DigitalNetSpec(d, n, sigma, tuple(matrices))


def write_point_set(ps: PointSet) -> str:
    """Point-set file: header "d N precision_bits", then one line per point
    of d dyadic rationals written as a/2^k."""
    lines = [f"{ps.d} {ps.n_points} {ps.precision_bits}"]
    for pt in ps.points:
        lines.append(" ".join(f"{x.num}/2^{x.exp}" for x in pt))
    return "\n".join(lines) + "\n"


def read_point_set(text: str) -> PointSet:
    lines = [ln for ln in text.splitlines()]
    if not lines or not lines[0].strip():
        raise ParseError("empty point-set file", line=1)
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError("expected header 'd N precision_bits'", line=1)
    try:
        d, n_pts, p_bits = (int(x) for x in head)
    except ValueError:
        raise ParseError("non-integer header field", line=1) from None
    body = [(i + 2, ln.strip()) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != n_pts:
        raise ParseError(f"expected {n_pts} points, found {len(body)}", line=len(lines))
    coords = []
    for ln_no, ln in body:
        parts = ln.split()
        if len(parts) != d:
            raise ParseError(f"expected {d} coordinates", line=ln_no)
        try:
            pt = [DyadicRational.parse(s) for s in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line=ln_no) from None
        try:
            coords.append(tuple(x.scaled_num(p_bits) for x in pt))
        except ValueError:
            raise ParseError("coordinate finer than declared precision", line=ln_no) from None
    ps = PointSet(d, p_bits, coords)
    return ps

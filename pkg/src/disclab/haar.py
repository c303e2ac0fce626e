"""Exact Haar coefficients of the discrepancy function.

The discrepancy function splits as D = C - L into a counting part and a
linear part, and the two behave very differently under the Haar system:

* the linear part has the closed-form coefficient
  <L, h_{j,m}> = N * prod_k c(j_k) with c(-1) = 1/2 and
  c(j) = -2^{-2j-2} for j >= 0, independent of the position m;
* the counting part is a sum over points of products of piecewise-linear
  one-dimensional factors, and vanishes unless the box has a point
  strictly inside it per coordinate.  In particular it vanishes whenever
  some level reaches the coordinate precision P, so only finitely many
  counting coefficients are nonzero.

A coefficient table therefore stores, per level vector ("shape"), a
sparse map from box position to the exact counting coefficient, kept as
integer numerators at the fixed exponent d*P.  Everything else (linear
parts, whole-shape energies, infinite tails over fine shapes) is closed
form; sums like Parseval's identity are evaluated exactly and rounded
once.

Blocks are built lazily from the point set and only persisted below a
size threshold, so tables for large nets stay small in memory while all
aggregate queries remain exact.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import sqrt
from typing import Iterable, Iterator, Sequence

from .dyadic import DyadicIndex, DyadicRational
from .errors import DomainError, ResourceLimitError
from .gf2net import PointSet
from .report import NormReport

DEFAULT_TABLE_BUDGET = 10**8
_PERSIST_LIMIT = 500_000  # sparse entries kept in memory across calls


# -- closed forms ----------------------------------------------------------

def linear_factor_1d(j: int) -> DyadicRational:
    """<x, h_{j,m}> on [0,1): 1/2 at level -1, else -2^{-2j-2} (any m)."""
    if j == -1:
        return DyadicRational(1, 1)
    return DyadicRational(-1, 2 * j + 2)


def coeff_linear(index: DyadicIndex, n_points: int) -> DyadicRational:
    """Haar coefficient of the linear part N x_1...x_d (exact)."""
    out = DyadicRational(n_points)
    for jk in index.j:
        out = out * linear_factor_1d(jk)
    return out


def point_factor_1d(j: int, m: int, z: DyadicRational) -> DyadicRational:
    """<chi_{[z,1)}, h_{j,m}> in one dimension (exact, piecewise linear).

    Zero unless z lies strictly inside the box; at level -1 it is 1 - z.
    """
    if j == -1:
        return DyadicRational(1) - z
    lo = DyadicRational(m, j)
    hi = DyadicRational(m + 1, j)
    if z <= lo or z >= hi:
        return DyadicRational(0)
    mid = DyadicRational(2 * m + 1, j + 1)
    half = DyadicRational(1, j + 1)
    if z <= mid:
        return (mid - z) - half
    return -(hi - z)


def coeff_point(index: DyadicIndex, z: Sequence[DyadicRational]) -> DyadicRational:
    """Haar coefficient of the box indicator chi_{[z,1)} of one point."""
    if len(z) != index.d:
        raise DomainError("point dimension mismatch")
    out = DyadicRational(1)
    for jk, mk, zk in zip(index.j, index.m, z):
        f = point_factor_1d(jk, mk, zk)
        if f.num == 0:
            return DyadicRational(0)
        out = out * f
    return out


def coeff_discrepancy(ps: PointSet, index: DyadicIndex) -> DyadicRational:
    """Exact <D, h_{j,m}> = sum_z coeff_point - coeff_linear."""
    acc = DyadicRational(0)
    for pt in ps.points:
        acc = acc + coeff_point(index, pt)
    return acc - coeff_linear(index, ps.n_points)


def linear_parseval_cell(j: int) -> Fraction:
    """Per-coordinate factor 2^{2 max(j,0)} c(j)^2 of the linear energy."""
    if j == -1:
        return Fraction(1, 4)
    return Fraction(1, 1 << (2 * j + 4))


def linear_parseval_axis_sum(max_level: int | None, include_constant: bool) -> Fraction:
    """Sum of linear_parseval_cell over one coordinate, to max_level or all.

    The level sum over j >= 0 is the geometric series with value 1/12;
    including the constant level -1 adds 1/4 (total 1/3, which recovers
    ||x_1...x_d||_2^2 = 3^{-d} for a single-point linear part).
    """
    base = Fraction(1, 4) if include_constant else Fraction(0)
    if max_level is None:
        return base + Fraction(1, 12)
    if max_level < 0:
        return base
    return base + Fraction(1, 12) * (1 - Fraction(1, 4 ** (max_level + 1)))


def linear_box_axis_sum(s: int, max_level: int | None) -> Fraction:
    """Per-coordinate linear energy restricted to a level-s dyadic interval:
    sum over j >= s of 2^j * 2^{j-s} * c(j)^2 (m-count inside the interval
    is 2^{j-s}).  Closed form (4/3) 2^{-3s-4} when unbounded."""
    if max_level is not None and max_level < s:
        return Fraction(0)
    lead = Fraction(4, 3) / (1 << (3 * s + 4))
    if max_level is None:
        return lead
    return lead - Fraction(4, 3) / (1 << (s + 2 * max_level + 6))


# -- the coefficient table -------------------------------------------------

def _shape_bits(shape: Sequence[int]) -> list[int]:
    return [max(j, 0) for j in shape]


def _pack(m: Sequence[int], bits: Sequence[int]) -> int:
    out = 0
    for mk, b in zip(m, bits):
        out = (out << b) | mk
    return out


def _unpack(packed: int, bits: Sequence[int]) -> tuple[int, ...]:
    out = []
    for b in reversed(bits):
        out.append(packed & ((1 << b) - 1))
        packed >>= b
    return tuple(reversed(out))


class HaarCoefficientTable:
    """Split Haar coefficients (counting, linear) of one discrepancy function.

    ``max_level`` truncates every coordinate level; blocks beyond the
    coordinate precision are empty by construction, and the linear part
    beyond the truncation is reconstructed analytically by the consumers.
    """

    def __init__(self, d: int, point_count: int, precision_bits: int | None,
                 max_level: int, *, ps: PointSet | None, blocks=None,
                 has_linear: bool):
        self.d = d
        self.point_count = point_count
        self.precision_bits = precision_bits
        self.max_level = max_level
        self.has_linear = has_linear
        self._ps = ps
        self._blocks: dict[tuple[int, ...], tuple[int, dict[int, int]]] = blocks or {}
        self._persist = True
        self._aggregates: dict[tuple[int, ...], tuple[int, int, int]] = {}
        self._axis_factors: list[dict[int, list[tuple[int, int]]]] | None = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_point_set(cls, ps: PointSet, max_level: int,
                       budget: int = DEFAULT_TABLE_BUDGET) -> "HaarCoefficientTable":
        if max_level < -1:
            raise DomainError("max_level must be >= -1")
        n_shapes = (max_level + 2) ** ps.d
        work = n_shapes * max(ps.n_points, 1)
        if work > budget:
            raise ResourceLimitError(
                f"coefficient table needs ~{work} work units, budget {budget}"
            )
        table = cls(ps.d, ps.n_points, ps.precision_bits, max_level,
                    ps=ps, has_linear=True)
        table._persist = work <= _PERSIST_LIMIT
        return table

    @classmethod
    def from_entries(cls, d: int, entries: dict[DyadicIndex, DyadicRational],
                     max_level: int | None = None) -> "HaarCoefficientTable":
        """Synthetic table: explicit counting coefficients, no linear part."""
        by_shape: dict[tuple[int, ...], dict[tuple[int, ...], DyadicRational]] = {}
        level = -1
        for idx, val in entries.items():
            if idx.d != d:
                raise DomainError("index dimension mismatch")
            by_shape.setdefault(idx.j, {})[idx.m] = val
            level = max(level, *idx.j)
        if max_level is None:
            max_level = level
        blocks = {}
        for shape, vals in by_shape.items():
            bits = _shape_bits(shape)
            exp = max((v.exp for v in vals.values()), default=0)
            blocks[shape] = (exp, {
                _pack(m, bits): v.scaled_num(exp) for m, v in vals.items() if v.num
            })
        return cls(d, 0, None, max_level, ps=None, blocks=blocks, has_linear=False)

    # -- shape-level access --------------------------------------------------

    def shapes(self, include_constant: bool = True) -> Iterator[tuple[int, ...]]:
        """Every level vector of the truncation, optionally without -1 levels."""
        lo = -1 if include_constant else 0
        yield from itertools.product(range(lo, self.max_level + 1), repeat=self.d)

    def _factors(self, axis: int, level: int) -> list[tuple[int, int]]:
        """Per point: (box position, counting factor numerator at exp P)."""
        if self._axis_factors is None:
            self._axis_factors = [dict() for _ in range(self.d)]
        cache = self._axis_factors[axis]
        if level in cache:
            return cache[level]
        p = self.precision_bits
        out = []
        if level == -1:
            cap = 1 << p
            out = [(0, cap - pt[axis]) for pt in self._ps.coords]
        else:
            sub = p - level  # level < p guaranteed by caller
            half = 1 << (sub - 1)
            for pt in self._ps.coords:
                a = pt[axis]
                m = a >> sub
                rem = a - (m << sub)  # offset inside the box
                # <chi_{[z,1)}, h> = -(z - lo) on the left half, -(hi - z)
                # on the right half, 0 on the boundary
                if rem == 0:
                    out.append((m, 0))
                elif rem <= half:
                    out.append((m, -rem))
                else:
                    out.append((m, rem - (half << 1)))
        cache[level] = out
        return out

    def _block(self, shape: tuple[int, ...]) -> tuple[int, dict[int, int]]:
        """(exponent, {packed position: counting numerator}) for one shape."""
        got = self._blocks.get(shape)
        if got is not None:
            return got
        if self._ps is None:
            return (0, {})
        p = self.precision_bits
        exp = self.d * p
        if any(j >= p for j in shape):
            result = (exp, {})  # counting part constant below the precision
        else:
            bits = _shape_bits(shape)
            per_axis = [self._factors(k, shape[k]) for k in range(self.d)]
            block: dict[int, int] = {}
            for i in range(self.point_count):
                num = 1
                packed = 0
                for k in range(self.d):
                    m, g = per_axis[k][i]
                    if g == 0:
                        num = 0
                        break
                    num *= g
                    packed = (packed << bits[k]) | m
                if num:
                    val = block.get(packed, 0) + num
                    if val:
                        block[packed] = val
                    else:
                        block.pop(packed, None)
            result = (exp, block)
        if self._persist:
            self._blocks[shape] = result
        return result

    def aggregates(self, shape: tuple[int, ...]) -> tuple[int, int, int]:
        """(exponent, sum, sum of squares) of the counting numerators."""
        got = self._aggregates.get(shape)
        if got is None:
            exp, block = self._block(shape)
            a = sum(block.values())
            b = sum(v * v for v in block.values())
            got = (exp, a, b)
            self._aggregates[shape] = got
        return got

    def linear_coeff(self, shape: Sequence[int]) -> DyadicRational:
        """Closed-form linear coefficient of the shape (same for every m)."""
        if not self.has_linear:
            return DyadicRational(0)
        out = DyadicRational(self.point_count)
        for jk in shape:
            out = out * linear_factor_1d(jk)
        return out

    def counting_coeff(self, index: DyadicIndex) -> DyadicRational:
        shape = index.j
        if max(shape) <= self.max_level:
            exp, block = self._block(shape)
            packed = _pack(index.m, _shape_bits(shape))
            return DyadicRational(block.get(packed, 0), exp)
        if self._ps is None:
            return DyadicRational(0)
        acc = DyadicRational(0)
        for pt in self._ps.points:
            acc = acc + coeff_point(index, pt)
        return acc

    def entry(self, index: DyadicIndex) -> tuple[DyadicRational, DyadicRational]:
        return self.counting_coeff(index), self.linear_coeff(index.j)

    def coeff(self, index: DyadicIndex) -> DyadicRational:
        cnt, lin = self.entry(index)
        return cnt - lin

    def sparse_items(self, shape: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], DyadicRational]]:
        exp, block = self._block(shape)
        bits = _shape_bits(shape)
        for packed, num in block.items():
            yield _unpack(packed, bits), DyadicRational(num, exp)

    # -- exact per-shape energies -------------------------------------------

    def energy(self, shape: tuple[int, ...]) -> Fraction:
        """sum_m (counting - linear)^2, exact, including every position m."""
        exp, a, b = self.aggregates(shape)
        total = Fraction(b, 1 << (2 * exp)) if b else Fraction(0)
        if self.has_linear:
            lin = self.linear_coeff(shape).as_fraction()
            order = sum(max(j, 0) for j in shape)
            if a:
                total -= 2 * lin * Fraction(a, 1 << exp)
            total += (1 << order) * lin * lin
        return total

    def energy_counting(self, shape: tuple[int, ...]) -> Fraction:
        exp, _a, b = self.aggregates(shape)
        return Fraction(b, 1 << (2 * exp)) if b else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HaarCoefficientTable):
            return NotImplemented
        if (self.d, self.point_count, self.precision_bits, self.max_level,
                self.has_linear) != (other.d, other.point_count,
                                     other.precision_bits, other.max_level,
                                     other.has_linear):
            return False
        for shape in self.shapes():
            ea, ba = self._block(shape)
            eb, bb = other._block(shape)
            if ba != bb or (ba and ea != eb):
                return False
        return True


def coefficient_table(ps: PointSet, max_order: int | None = None,
                      budget: int = DEFAULT_TABLE_BUDGET) -> HaarCoefficientTable:
    """Exact split coefficient table of D with per-coordinate truncation.

    The default truncation is the coordinate precision, beyond which the
    counting part vanishes and the linear part is a geometric tail.
    """
    if max_order is None:
        max_order = ps.precision_bits
    return HaarCoefficientTable.from_point_set(ps, max_order, budget=budget)


# -- Parseval and the square function --------------------------------------

def parseval_l2(table: HaarCoefficientTable) -> NormReport:
    """L2 norm of D from the coefficient table plus the analytic tail.

    Requires the truncation to reach precision_bits - 1 so that every
    omitted index carries a pure linear coefficient.
    """
    if table.precision_bits is None:
        raise DomainError("parseval_l2 needs a point-set table")
    if table.max_level < table.precision_bits - 1:
        raise DomainError(
            "truncation too small: counting coefficients extend beyond max_level"
        )
    total = Fraction(0)
    for shape in table.shapes():
        order = sum(max(j, 0) for j in shape)
        e = table.energy(shape)
        if e:
            total += (1 << order) * e
    if table.has_linear:
        n_sq = table.point_count ** 2
        full = linear_parseval_axis_sum(None, True) ** table.d
        trunc = linear_parseval_axis_sum(table.max_level, True) ** table.d
        total += n_sq * (full - trunc)
    return NormReport(
        value=sqrt(float(total)),
        method="parseval",
        error_bound=None,
        params={"norm": "l2", "N": table.point_count, "d": table.d,
                "max_level": table.max_level, "square": str(total)},
    )


def square_function(table: HaarCoefficientTable, shapes: Iterable[tuple[int, ...]],
                    x: Sequence[DyadicRational]) -> float:
    """Littlewood-Paley square function of the table restricted to ``shapes``
    at the point x: only the box containing x contributes per shape."""
    total = Fraction(0)
    for shape in shapes:
        m = tuple(_floor_index(xk, jk) for xk, jk in zip(x, shape))
        c = table.coeff(DyadicIndex(shape, m)).as_fraction()
        if c:
            order = sum(max(j, 0) for j in shape)
            total += (1 << (2 * order)) * c * c
    return sqrt(float(total))


def _floor_index(x: DyadicRational, j: int) -> int:
    if j <= 0:
        return 0
    return (x.num << j) >> x.exp


# -- maximal intervals of the counting part ---------------------------------

def box_contained(j: Sequence[int], m: Sequence[int], box: DyadicIndex) -> bool:
    """Whether I_{j,m} is inside the single dyadic box ``box``."""
    for jk, mk, bj, bm in zip(j, m, box.j, box.m):
        if bj == -1:
            continue
        level = max(jk, 0)
        if level < bj or (mk >> (level - bj)) != bm:
            return False
    return True


def _box_in_union(j, m, region: Sequence[DyadicIndex]) -> bool:
    if any(box_contained(j, m, box) for box in region):
        return True
    # a box can straddle several members; split to the finest member level
    levels = [max((max(b.j[k], 0) for b in region), default=0) for k in range(len(j))]
    extra = [max(0, lk - max(jk, 0)) for jk, lk in zip(j, levels)]
    n_cells = 1 << sum(extra)
    if n_cells > 4096:
        raise ResourceLimitError("union membership refinement too large")
    if n_cells == 1:
        return False
    for offsets in itertools.product(*(range(1 << e) for e in extra)):
        sub_j = [max(jk, 0) + e for jk, e in zip(j, extra)]
        sub_m = [(mk << e) | off for mk, e, off in zip(m, extra, offsets)]
        if not any(box_contained(sub_j, sub_m, box) for box in region):
            return False
    return True


def maximal_interval_mass(table: HaarCoefficientTable,
                          region: Sequence[DyadicIndex]) -> DyadicRational:
    """Total volume of the maximal dyadic boxes inside the region with
    volume at most 2^{-n} and nonzero counting coefficient (n chosen so
    that 2^n is the point count scale)."""
    if table.point_count < 1:
        raise DomainError("needs a point-set table")
    n = (table.point_count - 1).bit_length()  # ceil(log2 N), n with 2^n >= N
    p = table.precision_bits
    members: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    for shape in itertools.product(range(0, p), repeat=table.d):
        if sum(shape) < n:
            continue
        for m, val in table.sparse_items(shape):
            if val.num and _box_in_union(shape, m, region):
                members.add((shape, m))
    mass = DyadicRational(0)
    for shape, m in members:
        if _has_proper_ancestor(shape, m, members, n):
            continue
        mass = mass + DyadicRational(1, sum(shape))
    return mass


def _has_proper_ancestor(shape, m, members, n_min) -> bool:
    ranges = [range(0, jk + 1) for jk in shape]
    for anc in itertools.product(*ranges):
        if anc == tuple(shape) or sum(anc) < n_min:
            continue
        anc_m = tuple(mk >> (jk - ak) for mk, jk, ak in zip(m, shape, anc))
        if (anc, anc_m) in members:
            return True
    return False

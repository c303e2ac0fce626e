"""Exact evaluation of the discrepancy function and two exact norms.

For a point set P of N points, the discrepancy function is

    D(x) = #{z in P : z_k < x_k for all k} - N * x_1 ... x_d,

the signed difference between the number of points in the anchored
half-open box [0, x) and its fair share.  With dyadic inputs everything
here is computed in exact integer / rational arithmetic; floating point
appears only in the reported norm value.

The star discrepancy sup |D| is attained (or approached) only on the
critical grid built per axis from the point coordinates together with 0
and 1: on each grid cell the counting part is constant and the volume
term is monotone, so it suffices to evaluate the box-count surplus at
lower cell corners (closed count, limit from above) and the volume
surplus at upper corners (strict count, attained).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Sequence

from .dyadic import DyadicRational
from .errors import DomainError, ResourceLimitError
from .gf2net import PointSet
from .report import NormReport

DEFAULT_STAR_BUDGET = 5 * 10**7


@dataclass(frozen=True)
class DiscrepancyValue:
    """Counting part, linear part, and their exact difference at one x."""

    counting: int
    linear: DyadicRational

    @property
    def value(self) -> DyadicRational:
        return DyadicRational(self.counting) - self.linear


def local_discrepancy(ps: PointSet, x: Sequence[DyadicRational]) -> DiscrepancyValue:
    """D at a single point; x may touch the closed upper face x_k = 1."""
    if len(x) != ps.d:
        raise DomainError("point dimension mismatch")
    for xk in x:
        if not 0 <= xk.num and not xk <= 1:
            raise DomainError("x outside [0, 1]^d")
        if xk < 0 or xk > 1:
            raise DomainError("x outside [0, 1]^d")
    p = ps.precision_bits
    counting = 0
    for pt in ps.coords:
        if all(DyadicRational(a, p) < xk for a, xk in zip(pt, x)):
            counting += 1
    linear = DyadicRational(ps.n_points)
    for xk in x:
        linear = linear * xk
    return DiscrepancyValue(counting, linear)


def _axis_grids(ps: PointSet) -> tuple[list[list[int]], list[list[int]]]:
    """Per axis: sorted distinct coordinates with 0 (lower corners) and
    with 2^P i.e. 1 (upper corners)."""
    p_cap = 1 << ps.precision_bits
    lower, upper = [], []
    for k in range(ps.d):
        vals = sorted({pt[k] for pt in ps.coords})
        lower.append(sorted({0, *vals}))
        upper.append(sorted({*vals, p_cap}))
    return lower, upper


def star_discrepancy(ps: PointSet, budget: int = DEFAULT_STAR_BUDGET) -> NormReport:
    """Exact sup-norm of D over [0, 1]^d by critical-grid enumeration."""
    lower, upper = _axis_grids(ps)
    cells = 1
    for g in lower:
        cells *= len(g)
    if cells > budget:
        raise ResourceLimitError(
            f"star discrepancy needs {cells} grid evaluations, budget {budget}"
        )
    p = ps.precision_bits
    n_pts = ps.n_points
    scale = 1 << (ps.d * p)

    # sup of +D: counting with <= (limit x -> corner from above), lower corners
    best_plus = _sweep_max(ps.coords, lower, strict=False, p_bits=p, n=n_pts, sign=+1)
    # sup of -D: counting with <, attained at upper corners
    best_minus = _sweep_max(ps.coords, upper, strict=True, p_bits=p, n=n_pts, sign=-1)

    best = max(best_plus, best_minus, 0)
    value = Fraction(best, scale)
    return NormReport(
        value=float(value),
        method="exact-cell",
        error_bound=None,
        params={"norm": "star", "N": n_pts, "d": ps.d, "exact": f"{best}/2^{ps.d * p}"},
    )


def _sweep_max(coords, grids, strict: bool, p_bits: int, n: int, sign: int) -> int:
    """Max over the grid of sign * (count * 2^{dP} - N * prod(corner)).

    Counting uses <= (strict=False) or < (strict=True) per coordinate.
    Points are filtered axis by axis; the last axis is swept in sorted
    order with a two-pointer count.
    """
    d = len(grids)
    scale = 1 << (d * p_bits)

    def recurse(axis: int, pts: list[tuple[int, ...]], prod: int) -> int:
        if axis == d - 1:
            zs = sorted(pt[axis] for pt in pts)
            best = None
            idx = 0
            for a in grids[axis]:
                while idx < len(zs) and (zs[idx] < a or (not strict and zs[idx] == a)):
                    idx += 1
                val = sign * (idx * scale - n * prod * a)
                if best is None or val > best:
                    best = val
            return best if best is not None else 0
        best = None
        for a in grids[axis]:
            if strict:
                kept = [pt for pt in pts if pt[axis] < a]
            else:
                kept = [pt for pt in pts if pt[axis] <= a]
            val = recurse(axis + 1, kept, prod * a)
            if best is None or val > best:
                best = val
        return best if best is not None else 0

    return recurse(0, list(coords), 1)


def l2_warnock(ps: PointSet) -> NormReport:
    """Exact L2 norm of D via the closed-form pair sum

        ||D||_2^2 = sum_{z,z'} prod_k (1 - max(z_k, z'_k))
                    - N 2^{1-d} sum_z prod_k (1 - z_k^2) + N^2 3^{-d},

    evaluated in integer arithmetic and rounded once at the end.
    """
    if ps.n_points < 1:
        raise DomainError("need at least one point")
    p = ps.precision_bits
    cap = 1 << p
    cap2 = 1 << (2 * p)
    d = ps.d
    n = ps.n_points
    coords = ps.coords

    pair_sum = 0  # scaled by 2^{dP}
    for i, zi in enumerate(coords):
        # diagonal term once, off-diagonal doubled
        prod = 1
        for a in zi:
            prod *= cap - a
        pair_sum += prod
        for zj in coords[i + 1 :]:
            prod = 1
            for a, b in zip(zi, zj):
                prod *= cap - (a if a > b else b)
            pair_sum += 2 * prod

    single_sum = 0  # scaled by 2^{2dP}
    for zi in coords:
        prod = 1
        for a in zi:
            prod *= cap2 - a * a
        single_sum += prod

    total = (
        Fraction(pair_sum, 1 << (d * p))
        - n * Fraction(2 * single_sum, (1 << d) * (1 << (2 * d * p)))
        + Fraction(n * n, 3**d)
    )
    return NormReport(
        value=sqrt(float(total)),
        method="warnock",
        error_bound=None,
        params={"norm": "l2", "N": n, "d": d, "square": str(total)},
    )

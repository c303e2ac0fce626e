"""Theorem-level empirical verification: empty-box combinatorics, the
three-regime coefficient sums, and scaling studies over net families.

The empty-box count is exact combinatorics, not an asymptotic statement:
choosing the level n with 2N <= 2^n < 4N, every shape of order n has
2^n boxes and at most N of them can be occupied, so at least half are
empty.  Summing the squared closed-form linear coefficients over the
empty boxes then lower-bounds the BMO energy at U = cube from below,
and the lower bound scales like n^{(d-1)/2}.

Scaling studies fit log(value) against log(n) with N = 2^n, since the
theoretical rates are powers of log N.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from typing import Callable, Sequence

import numpy as np

from .discrepancy import l2_warnock, star_discrepancy
from .dyadic import DyadicRational, enumerate_shapes
from .errors import DomainError
from .families import (
    hammersley_spec,
    interlaced_sobol_spec,
    sobol_spec,
)
from .gf2net import DigitalNetSpec, PointSet, box_point_counts, digital_points
from .haar import (
    HaarCoefficientTable,
    coefficient_table,
    linear_factor_1d,
    linear_parseval_axis_sum,
)
from .norms import BmoFamily, bmo_proxy, orlicz_norm_proxy
from .report import NormReport


def _empty_box_level(n_points: int) -> int:
    """The n with 2N <= 2^n < 4N (for N = 2^k this is k + 1)."""
    n = 1
    while (1 << n) < 2 * n_points:
        n += 1
    return n


def check_empty_boxes(ps: PointSet) -> dict:
    """Per shape of order n: the number of empty dyadic boxes, which is at
    least 2^{n-1} for every point set by pigeonhole (zero tolerance)."""
    n = _empty_box_level(ps.n_points)
    shapes = enumerate_shapes(ps.d, n)
    per_shape = {}
    all_pass = True
    bound_sq = Fraction(0)
    for shape in shapes:
        occupied = len(box_point_counts(ps, shape))
        empty = (1 << n) - occupied
        ok = empty >= 1 << (n - 1)
        all_pass &= ok
        per_shape[shape] = {"empty": empty, "required": 1 << (n - 1), "pass": ok}
        lin = DyadicRational(ps.n_points)
        for jk in shape:
            lin = lin * linear_factor_1d(jk)
        bound_sq += (1 << n) * empty * lin.as_fraction() ** 2
    return {
        "n": n,
        "N": ps.n_points,
        "d": ps.d,
        "per_shape": per_shape,
        "pass": all_pass,
        "lower_bound_square": bound_sq,
        "lower_bound": sqrt(float(bound_sq)),
    }


def bmo_lower_bound(ps: PointSet) -> NormReport:
    """Exact empty-box lower bound of the BMO seminorm at U = cube:
    (sum_{|j|=n} 2^n sum_{empty m} lin^2)^{1/2}."""
    rep = check_empty_boxes(ps)
    return NormReport(
        value=rep["lower_bound"],
        method="parseval",
        error_bound=None,
        params={"norm": "bmo-lower-bound", "n": rep["n"], "N": ps.n_points,
                "d": ps.d, "square": str(rep["lower_bound_square"])},
    )


@dataclass(frozen=True)
class RegimeSums:
    """The BMO-at-cube energy split by interval size for an order-2 net.

    large / intermediate carry the full coefficients; the small regime
    (|j| >= n) is reported with the linear and counting parts separated,
    plus their exact combined value for partition checks.
    """

    large: float
    intermediate: float
    small_linear: float
    small_counting: float
    small_full: float
    boundary: int  # n - ceil(t/2)
    n: int
    t: int

    @property
    def total_with_small_full(self) -> float:
        return self.large + self.intermediate + self.small_full


def three_regime_sums(table: HaarCoefficientTable, n: int, t: int) -> RegimeSums:
    """Evaluate the three-way split of sum_{j in N_0^d} 2^{|j|} sum_m coeff^2
    at |j| < n - ceil(t/2), < n, >= n (U = cube, |U| = 1)."""
    if table.precision_bits is None:
        raise DomainError("needs a point-set table")
    if table.max_level < table.precision_bits - 1:
        raise DomainError("table truncation too small")
    boundary = n - (t + 1) // 2
    large = Fraction(0)
    intermediate = Fraction(0)
    small_full = Fraction(0)
    small_counting = Fraction(0)
    for shape in table.shapes(include_constant=False):
        order = sum(shape)
        if order < boundary:
            large += (1 << order) * table.energy(shape)
        elif order < n:
            intermediate += (1 << order) * table.energy(shape)
        else:
            small_full += (1 << order) * table.energy(shape)
            small_counting += (1 << order) * table.energy_counting(shape)
    n_sq = table.point_count ** 2
    lin_full = n_sq * linear_parseval_axis_sum(None, False) ** table.d
    lin_trunc = n_sq * linear_parseval_axis_sum(table.max_level, False) ** table.d
    tail = lin_full - lin_trunc  # shapes beyond the truncation, all of order >= n
    small_full += tail
    small_linear = tail + _linear_sum_at_least(table, n)
    return RegimeSums(
        large=float(large),
        intermediate=float(intermediate),
        small_linear=float(small_linear),
        small_counting=float(small_counting),
        small_full=float(small_full),
        boundary=boundary,
        n=n,
        t=t,
    )


def _linear_sum_at_least(table: HaarCoefficientTable, n: int) -> Fraction:
    """sum over j in N_0^d with n <= |j|, j_k <= max_level of 2^{2|j|} lin^2."""
    d = table.d
    n_sq = table.point_count ** 2
    trunc_total = n_sq * linear_parseval_axis_sum(table.max_level, False) ** d
    below = Fraction(0)
    for order in range(n):
        for shape in enumerate_shapes(d, order):
            if max(shape) > table.max_level:
                continue
            term = Fraction(n_sq)
            for jk in shape:
                term *= Fraction(1, 1 << (2 * jk + 4))
            below += term
    return trunc_total - below


@dataclass
class ScalingStudy:
    """A norm measured along a net family, with the log-log fitted exponent."""

    construction: str
    d: int
    norm: str
    rows: list[dict] = field(default_factory=list)
    exponent: float = math.nan
    residual: float = math.nan

    def fit(self):
        ns = np.array([r["n"] for r in self.rows], dtype=float)
        vals = np.array([r["value"] for r in self.rows], dtype=float)
        if (vals <= 0).any():
            raise DomainError("cannot fit a zero/negative norm on a log scale")
        coef, res = np.polyfit(np.log(ns), np.log(vals), 1, full=True)[:2]
        self.exponent = float(coef[0])
        self.residual = float(res[0]) if len(res) else 0.0
        return self


CONSTRUCTIONS: dict[str, Callable[[int, int], DigitalNetSpec]] = {
    "hammersley": lambda d, n: hammersley_spec(n),
    "sobol": lambda d, n: sobol_spec(d, n),
    "interlaced2": lambda d, n: interlaced_sobol_spec(d, n, 2),
}


def _study_value(norm: str, ps: PointSet, seed: int) -> float:
    if norm == "l2":
        return l2_warnock(ps).value
    if norm == "star":
        return star_discrepancy(ps).value
    if norm == "bmo_proxy":
        table = coefficient_table(ps)
        return bmo_proxy(table, BmoFamily(order_cap=1)).value
    if norm == "bmo_lower":
        return bmo_lower_bound(ps).value
    if norm == "orlicz_proxy":
        d = ps.d
        alpha = 2.0 / (d - 1) if d > 1 else 2.0
        return orlicz_norm_proxy(ps, alpha).value
    raise DomainError(f"unknown study norm {norm!r}")


def _study_row(args) -> dict:
    construction, d, n, norm, seed = args
    spec = CONSTRUCTIONS[construction](d, n)
    ps = digital_points(spec)
    value = _study_value(norm, ps, seed)
    return {"n": n, "N": ps.n_points, "value": value, "method": norm}


def max_workers() -> int:
    """Parallelism cap from DISCLAB_THREADS (default 1: fully serial)."""
    try:
        return max(1, int(os.environ.get("DISCLAB_THREADS", "1")))
    except ValueError:
        return 1


def scaling_study(construction: str, d: int, n_range: Sequence[int], norm: str,
                  seed: int = 0) -> ScalingStudy:
    """Build the net at each n, compute the norm, and fit the exponent of
    value ~ n^e.  Requires at least 4 sizes for a meaningful fit."""
    if len(n_range) < 4:
        raise DomainError("need at least 4 sizes for a scaling fit")
    if construction not in CONSTRUCTIONS:
        raise DomainError(
            f"unknown construction {construction!r}; available: {sorted(CONSTRUCTIONS)}"
        )
    jobs = [(construction, d, n, norm, seed) for n in n_range]
    workers = max_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_study_row, jobs))
    else:
        rows = [_study_row(j) for j in jobs]
    study = ScalingStudy(construction=construction, d=d, norm=norm, rows=rows)
    return study.fit()


def discretization_consistency(ps: PointSet, cells: int = 1000, seed: int = 0) -> dict:
    """On random cells of the 2^{-P} grid, the counting part is constant and
    D varies at most by the linear part's modulus N 2^{-P} sum_k prod_{l!=k} b_l.

    Only applies to sets at a power-of-two count with net-like precision.
    """
    n_pts = ps.n_points
    p = ps.precision_bits
    n = n_pts.bit_length() - 1
    applicable = n_pts == 1 << n and p >= 1 and p % max(n, 1) == 0 and p // max(n, 1) <= 4
    if not applicable:
        return {"applicable": False, "reason": "not a binary-net point set",
                "N": n_pts, "precision_bits": p}
    rng = np.random.default_rng(seed)
    cap = 1 << p
    max_variation = 0.0
    max_bound = 0.0
    counting_constant = True
    for _ in range(cells):
        cell = [int(rng.integers(0, cap)) for _ in range(ps.d)]
        # D at the two sample offsets 1/4 and 3/4 inside the cell, exactly
        samples = []
        for off_num in (1, 3):
            x = [DyadicRational(4 * c + off_num, p + 2) for c in cell]
            counting = 0
            for pt in ps.coords:
                if all((4 * a) < (4 * c + off_num) for a, c in zip(pt, cell)):
                    counting += 1
            lin = Fraction(n_pts)
            for xk in x:
                lin *= xk.as_fraction()
            samples.append((counting, float(Fraction(counting) - lin)))
        counting_constant &= samples[0][0] == samples[1][0]
        variation = abs(samples[0][1] - samples[1][1])
        upper = [(c + 1) / cap for c in cell]
        prod_all = 1.0
        for u in upper:
            prod_all *= u
        bound = n_pts * (1.0 / cap) * sum(prod_all / u for u in upper)
        max_variation = max(max_variation, variation)
        max_bound = max(max_bound, bound)
        if variation > bound + 1e-12:
            return {"applicable": True, "pass": False, "cell": cell,
                    "variation": variation, "bound": bound}
    return {
        "applicable": True,
        "pass": counting_constant,
        "counting_constant": counting_constant,
        "max_variation": max_variation,
        "max_bound": max_bound,
        "cells": cells,
        "seed": seed,
    }

"""L_p, BMO, and exponential-Orlicz norms of the discrepancy function.

Exact even-p L_p norms use the cell decomposition of the cube on which
the counting part A of D = A - N x_1...x_d is constant.  Expanding
(c - N V)^p by the binomial theorem per cell and integrating each
monomial in closed form reduces the integral to the sums

    S_{q,i} = sum_cells A^q * prod_k (b_k^{i+1} - a_k^{i+1}),

which are evaluated in exact integer arithmetic (the alternating
binomial recombination cancels tens of digits, so floating point is not
an option).  A runs sweep exploits that A changes only at point
coordinates per axis: the sum over an axis telescopes between
consecutive distinct coordinate values, so the work is proportional to
the number of constancy runs rather than the full cell grid.

The BMO proxy reports a certified lower bound of the dyadic product BMO
seminorm: the supremum over arbitrary measurable sets is replaced by an
explicit candidate family (the cube, dyadic boxes up to an order cap,
and per-shape unions of the highest-energy boxes).  Orlicz norms come in
two flavors: a direct Luxemburg-norm bisection against a stratified
sample of |D|, and the sup_p p^{-1/alpha} ||D||_p proxy over an even-p
grid, which is equivalent up to constants.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, sqrt
from typing import Iterable, Sequence

import numpy as np

from .discrepancy import DEFAULT_STAR_BUDGET, star_discrepancy
from .dyadic import DyadicIndex
from .errors import DomainError, ResourceLimitError
from .gf2net import PointSet
from .haar import (
    HaarCoefficientTable,
    linear_box_axis_sum,
    linear_parseval_axis_sum,
)
from .report import NormReport

DEFAULT_LP_BUDGET = 2 * 10**8
DEFAULT_SAMPLES = 4096
DEFAULT_P_GRID = (2, 4, 8, 16, 32)


# -- exact L_p ---------------------------------------------------------------

try:  # big-integer fast path; plain ints are a correct fallback
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int


def _axis_grid(ps: PointSet, axis: int) -> list[int]:
    return sorted({0, *(pt[axis] for pt in ps.coords)})


class _AxisPows:
    """Lazy tables v^e for the distinct coordinates of each axis (with the
    unit cap 2^P appended), indexed by grid position."""

    def __init__(self, coords, d, p_bits):
        cap = 1 << p_bits
        self.grids = []
        self.index = []
        for k in range(d):
            g = sorted({pt[k] for pt in coords})
            self.index.append({v: i for i, v in enumerate(g)})
            self.grids.append(g + [cap])
        self._cache: list[dict[int, list]] = [dict() for _ in range(d)]

    def table(self, k, e):
        tab = self._cache[k].get(e)
        if tab is None:
            tab = [_mpz(v) ** e for v in self.grids[k]]
            self._cache[k][e] = tab
        return tab

    def as_indices(self, coords):
        return sorted(tuple(self.index[k][pt[k]] for k in range(len(self.index)))
                      for pt in coords)


def _cell_sums_1d(coords, p_bits, powers, combos):
    """S_{q,i} for d = 1: one runs sweep over distinct coordinates."""
    ap = _AxisPows(coords, 1, p_bits)
    pts = ap.as_indices(coords)
    counts: dict[int, int] = {}
    for (i0,) in pts:
        counts[i0] = counts.get(i0, 0) + 1
    vals = sorted(counts)
    last = len(ap.grids[0]) - 1
    out = {}
    for q, i in combos:
        p0 = ap.table(0, i + 1)
        pow_q = powers[q]
        acc = _mpz(0)
        c = 0
        for r, v in enumerate(vals):
            c += counts[v]
            nxt = vals[r + 1] if r + 1 < len(vals) else last
            acc += pow_q[c] * (p0[nxt] - p0[v])
        out[(q, i)] = int(acc)
    return out


def _cell_sums_2d(coords, p_bits, powers, combos):
    """S_{q,i} for d = 2: the active set grows along axis 0; per growth step
    one runs walk along axis 1."""
    ap = _AxisPows(coords, 2, p_bits)
    pts = ap.as_indices(coords)
    groups: list[tuple[int, list[int]]] = []
    for i0, i1 in pts:
        if not groups or groups[-1][0] != i0:
            groups.append((i0, []))
        groups[-1][1].append(i1)
    last0 = len(ap.grids[0]) - 1
    last1 = len(ap.grids[1]) - 1
    out = {}
    for q, i in combos:
        p0 = ap.table(0, i + 1)
        p1 = ap.table(1, i + 1)
        pow_q = powers[q]
        acc = _mpz(0)
        inner_idx: list[int] = []
        inner_cnt: dict[int, int] = {}
        for gi, (i0, members) in enumerate(groups):
            for i1 in members:
                if i1 in inner_cnt:
                    inner_cnt[i1] += 1
                else:
                    inner_cnt[i1] = 1
                    insort(inner_idx, i1)
            nxt0 = groups[gi + 1][0] if gi + 1 < len(groups) else last0
            w0 = p0[nxt0] - p0[i0]
            inner = _mpz(0)
            c = 0
            li = len(inner_idx)
            for r in range(li):
                v = inner_idx[r]
                c += inner_cnt[v]
                nxt = inner_idx[r + 1] if r + 1 < li else last1
                inner += pow_q[c] * (p1[nxt] - p1[v])
            acc += w0 * inner
        out[(q, i)] = int(acc)
    return out


def _cell_sums_3d(coords, p_bits, powers, combos):
    """S_{q,i} for d = 3: the active set grows along axis 0; per growth step
    a middle sweep over distinct axis-1 values with inner runs along axis 2."""
    ap = _AxisPows(coords, 3, p_bits)
    pts = ap.as_indices(coords)
    groups: list[tuple[int, list[tuple[int, int]]]] = []
    for i0, i1, i2 in pts:
        if not groups or groups[-1][0] != i0:
            groups.append((i0, []))
        groups[-1][1].append((i1, i2))
    last = [len(g) - 1 for g in ap.grids]
    out = {}
    for q, i in combos:
        p0 = ap.table(0, i + 1)
        p1 = ap.table(1, i + 1)
        p2 = ap.table(2, i + 1)
        pow_q = powers[q]
        acc = _mpz(0)
        active: list[tuple[int, int]] = []
        for gi, (i0, members) in enumerate(groups):
            for pair in members:
                insort(active, pair)
            nxt0 = groups[gi + 1][0] if gi + 1 < len(groups) else last[0]
            w0 = p0[nxt0] - p0[i0]
            mid_total = _mpz(0)
            inner_idx: list[int] = []
            inner_cnt: dict[int, int] = {}
            a = 0
            la = len(active)
            while a < la:
                v1 = active[a][0]
                while a < la and active[a][0] == v1:
                    z2 = active[a][1]
                    if z2 in inner_cnt:
                        inner_cnt[z2] += 1
                    else:
                        inner_cnt[z2] = 1
                        insort(inner_idx, z2)
                    a += 1
                nxt1 = active[a][0] if a < la else last[1]
                w1 = p1[nxt1] - p1[v1]
                inner = _mpz(0)
                c = 0
                li = len(inner_idx)
                for r in range(li):
                    v = inner_idx[r]
                    c += inner_cnt[v]
                    nxt = inner_idx[r + 1] if r + 1 < li else last[2]
                    inner += pow_q[c] * (p2[nxt] - p2[v])
                mid_total += w1 * inner
            acc += w0 * mid_total
        out[(q, i)] = int(acc)
    return out


def lp_integral_exact(ps: PointSet, p_values: Sequence[int],
                      budget: int = DEFAULT_LP_BUDGET) -> dict[int, Fraction]:
    """Exact integral of D^p over the cube for each even p requested."""
    for p in p_values:
        if p < 2 or p % 2:
            raise DomainError("exact L_p needs even p >= 2 (use lp_norm_estimate)")
    if ps.d > 3:
        raise DomainError("exact L_p cells are implemented for d <= 3")
    cells = 1
    for k in range(ps.d):
        cells *= len(_axis_grid(ps, k))
    if cells > budget:
        raise ResourceLimitError(f"L_p cell grid has {cells} cells, budget {budget}")

    p_max = max(p_values)
    combos = sorted({(p - i, i) for p in p_values for i in range(p)})
    powers = [None] * (p_max + 1)
    for q in sorted({q for q, _ in combos}):
        powers[q] = [_mpz(c) ** q for c in range(ps.n_points + 1)]

    sums = {1: _cell_sums_1d, 2: _cell_sums_2d, 3: _cell_sums_3d}[ps.d](
        ps.coords, ps.precision_bits, powers, combos
    )

    n = ps.n_points
    d = ps.d
    p_bits = ps.precision_bits
    out = {}
    for p in p_values:
        total = Fraction(n**p, (p + 1) ** d)  # the i = p (pure volume) term
        for i in range(p):
            q = p - i
            s = sums[(q, i)]
            if not s:
                continue
            term = Fraction(comb(p, i) * (-n) ** i * s,
                            (i + 1) ** d * (1 << (d * p_bits * (i + 1))))
            total += term
        if total < 0:
            raise AssertionError("negative even-power integral (arithmetic bug)")
        out[p] = total
    return out


def lp_norm_exact(ps: PointSet, p: int, budget: int = DEFAULT_LP_BUDGET) -> NormReport:
    """||D||_p for even p, exact up to the final root."""
    total = lp_integral_exact(ps, [p], budget=budget)[p]
    return NormReport(
        value=float(total) ** (1.0 / p),
        method="exact-cell",
        error_bound=None,
        params={"norm": f"l{p}", "N": ps.n_points, "d": ps.d, "p": p},
    )


# -- stratified sampling -----------------------------------------------------

def stratified_points(d: int, n_samples: int, seed: int) -> np.ndarray:
    """Jittered-grid sample of the cube, deterministic given the seed."""
    side = max(1, round(n_samples ** (1.0 / d)))
    rng = np.random.default_rng(seed)
    axes = [np.arange(side, dtype=np.float64) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    base = np.stack([m.reshape(-1) for m in mesh], axis=1)
    jitter = rng.random(base.shape)
    return (base + jitter) / side


def discrepancy_values(ps: PointSet, xs: np.ndarray) -> np.ndarray:
    """D at each sample row of xs (float64; coordinates are exact dyadics)."""
    pts = np.asarray(ps.coords, dtype=np.float64) / (1 << ps.precision_bits)
    n = ps.n_points
    out = np.empty(len(xs))
    chunk = max(1, (2**22) // max(1, n * ps.d))
    for lo in range(0, len(xs), chunk):
        x = xs[lo : lo + chunk]
        counts = (pts[None, :, :] < x[:, None, :]).all(axis=2).sum(axis=1)
        out[lo : lo + chunk] = counts - n * x.prod(axis=1)
    return out


def lp_norm_estimate(ps: PointSet, p: float, samples: int = DEFAULT_SAMPLES,
                     seed: int = 0) -> NormReport:
    """Stratified Monte Carlo estimate of ||D||_p with a 3-sigma bound."""
    if p < 1:
        raise DomainError("p must be >= 1")
    xs = stratified_points(ps.d, samples, seed)
    vals = np.abs(discrepancy_values(ps, xs)) ** p
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / sqrt(len(vals))) if len(vals) > 1 else 0.0
    value = mean ** (1.0 / p)
    # first-order propagation of a 3-sigma integral error through t^{1/p}
    bound = value * (3 * se) / (p * mean) if mean > 0 else 3 * se
    return NormReport(
        value=value,
        method="monte-carlo",
        error_bound=bound,
        params={"norm": f"l{p}", "N": ps.n_points, "d": ps.d, "p": p,
                "samples": len(xs), "seed": seed},
    )


# -- exponential Orlicz ------------------------------------------------------

@dataclass(frozen=True)
class OrliczSpec:
    """Young function psi(x) = exp(x^alpha) - 1 for large x, linearized
    below the tangency threshold when alpha < 1 to restore convexity.

    The threshold solves psi(t) = t psi'(t) (the tangent line through the
    origin), and the slope is psi'(t); for alpha >= 1 the exponential form
    is convex everywhere and the threshold is 0.
    """

    alpha: float
    threshold: float = field(init=False)
    slope: float = field(init=False)

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.alpha >= 1:
            object.__setattr__(self, "threshold", 0.0)
            object.__setattr__(self, "slope", 1.0)
            return
        a = self.alpha

        def gap(x):  # x psi'(x) - psi(x); root > inflection point
            xa = x**a
            return a * xa * math.exp(xa) - math.expm1(xa)

        lo = ((1 - a) / a) ** (1 / a)  # below: gap < 0
        hi = lo + 1.0
        while gap(hi) <= 0:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if gap(mid) > 0:
                hi = mid
            else:
                lo = mid
        t = 0.5 * (lo + hi)
        object.__setattr__(self, "threshold", t)
        object.__setattr__(self, "slope", self.alpha * t ** (self.alpha - 1) * math.exp(t**self.alpha))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.threshold == 0.0:
            with np.errstate(over="ignore"):
                return np.expm1(x**self.alpha)
        out = np.where(x <= self.threshold, self.slope * x, 0.0)
        big = x > self.threshold
        with np.errstate(over="ignore"):
            out[big] = np.expm1(x[big] ** self.alpha)
        return out


def orlicz_norm_of_values(values: np.ndarray, spec: OrliczSpec,
                          rel_tol: float = 1e-6) -> tuple[float, float]:
    """Luxemburg norm inf{K : E psi(|v|/K) <= 1} of an equal-weight sample.

    Returns (norm, half bracket width).  The map K -> E psi is monotone
    decreasing, so bisection applies; an infinite expectation just means
    K is below the bracket.
    """
    vals = np.abs(np.asarray(values, dtype=np.float64))
    vmax = float(vals.max(initial=0.0))
    if vmax == 0.0:
        return 0.0, 0.0

    def expect(k: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.mean(spec.evaluate(vals / k)))

    lo = vmax / 1e6
    hi = vmax * 10.0
    for _ in range(200):  # capped bracket expansion
        if expect(hi) <= 1.0:
            break
        hi *= 4.0
    else:
        raise DomainError("could not bracket the Orlicz norm from above")
    while expect(lo) <= 1.0 and lo > 1e-300:
        lo /= 16.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if expect(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi, 0.5 * (hi - lo)


def orlicz_norm_direct(ps: PointSet, spec: OrliczSpec,
                       samples: int = DEFAULT_SAMPLES, seed: int = 0) -> NormReport:
    """Direct Luxemburg norm of D against a stratified sample."""
    xs = stratified_points(ps.d, samples, seed)
    vals = discrepancy_values(ps, xs)
    norm, half = orlicz_norm_of_values(vals, spec)
    return NormReport(
        value=norm,
        method="bisection",
        error_bound=half,
        params={"norm": "orlicz-direct", "alpha": spec.alpha, "N": ps.n_points,
                "d": ps.d, "samples": len(xs), "seed": seed,
                "note": "bound covers bisection only; expectation is sampled"},
    )


def orlicz_norm_proxy(ps: PointSet, alpha: float,
                      p_grid: Sequence[int] = DEFAULT_P_GRID,
                      budget: int = DEFAULT_LP_BUDGET) -> NormReport:
    """sup_p p^{-1/alpha} ||D||_p over an even-p grid (exact L_p inside).

    Up to constants this is the exp(L^alpha) norm; the finite grid
    approximates the supremum from below.
    """
    if not p_grid:
        raise DomainError("p_grid must be non-empty")
    integrals = lp_integral_exact(ps, sorted(set(p_grid)), budget=budget)
    best, best_p = -1.0, None
    per_p = {}
    for p, total in integrals.items():
        lp = float(total) ** (1.0 / p)
        scaled = p ** (-1.0 / alpha) * lp
        per_p[p] = lp
        if scaled > best:
            best, best_p = scaled, p
    return NormReport(
        value=best,
        method="proxy-sup-p",
        error_bound=None,
        params={"norm": "orlicz-proxy", "alpha": alpha, "p_grid": list(p_grid),
                "argmax_p": best_p, "lp_values": {str(p): v for p, v in per_p.items()},
                "N": ps.n_points, "d": ps.d},
    )


# -- BMO proxy ----------------------------------------------------------------

@dataclass(frozen=True)
class BmoFamily:
    """Candidate-region strategy: dyadic boxes of order <= order_cap (order 0
    is the whole cube) and, per shape, unions of the k highest-energy boxes."""

    order_cap: int = 2
    top_unions: bool = True


def _box_energies(table: HaarCoefficientTable, family: BmoFamily):
    """Exact contained Haar energy of every candidate box, keyed by
    (box shape, box position)."""
    if table.precision_bits is not None and table.max_level < table.precision_bits - 1:
        raise DomainError("table truncation too small for certified box energies")
    d = table.d
    n_sq = table.point_count ** 2
    box_shapes = [
        s for order in range(family.order_cap + 1)
        for s in _shapes_of_order(d, order)
    ]
    energies: dict = {}
    for s in box_shapes:
        lin_tail = n_sq
        for sk in s:
            lin_tail *= linear_box_axis_sum(sk, None)
        for q in _positions_of(s):
            energies[(s, q)] = Fraction(lin_tail)

    for shape in table.shapes(include_constant=False):
        exp, block = table._block(shape)
        if not block:
            continue
        order = sum(shape)
        lin = table.linear_coeff(shape)
        bits = [max(j, 0) for j in shape]
        compat = [
            (s, [jk - sk for jk, sk in zip(shape, s)])
            for s in box_shapes
            if all(sk <= jk for sk, jk in zip(s, shape))
        ]
        if not compat:
            continue
        # per-shape integer accumulators at the block exponent, folded once
        acc_sq: dict = {}
        acc_cross: dict = {}
        for packed, num in block.items():
            m = _unpack_bits(packed, bits)
            sq = num * num
            for s, shifts in compat:
                key = (s, tuple(mk >> sh for mk, sh in zip(m, shifts)))
                acc_sq[key] = acc_sq.get(key, 0) + sq
                if lin.num:
                    acc_cross[key] = acc_cross.get(key, 0) + num
        scale_sq = Fraction(1 << order, 1 << (2 * exp))
        scale_cross = (
            Fraction(2 * lin.num << order, 1 << (exp + lin.exp)) if lin.num else None
        )
        for key, sq in acc_sq.items():
            energies[key] += sq * scale_sq
            if scale_cross is not None:
                energies[key] -= acc_cross[key] * scale_cross
    return energies


def _shapes_of_order(d, order):
    if d == 1:
        yield (order,)
        return
    for first in range(order + 1):
        for rest in _shapes_of_order(d - 1, order - first):
            yield (first,) + rest


def _positions_of(shape):
    import itertools
    return itertools.product(*(range(1 << sk) for sk in shape))


def _bits_of(shape):
    return [max(s, 0) for s in shape]


def _unpack_bits(packed, bits):
    out = []
    for b in reversed(bits):
        out.append(packed & ((1 << b) - 1))
        packed >>= b
    return tuple(reversed(out))


def bmo_proxy(table: HaarCoefficientTable, family: BmoFamily = BmoFamily()) -> NormReport:
    """Certified lower bound of the dyadic product BMO seminorm.

    Evaluates |U|^{-1} sum_{j in N_0^d} 2^{|j|} sum_{I_{j,m} subset U}
    coeff^2 over the candidate family and reports the square root of the
    maximum.  Union candidates count only boxes lying inside a single
    member, which keeps the bound certified.
    """
    energies = _box_energies(table, family)
    best = Fraction(0)
    best_desc = "cube"
    for (s, q), e in energies.items():
        val = e * (1 << sum(s))  # divide by |B| = 2^{-|s|}
        if val > best:
            best = val
            best_desc = f"box j={s} m={q}" if sum(s) else "cube"
    if family.top_unions:
        by_shape: dict = {}
        for (s, q), e in energies.items():
            by_shape.setdefault(s, []).append(e)
        for s, vals in by_shape.items():
            if sum(s) == 0:
                continue
            vals.sort(reverse=True)
            running = Fraction(0)
            for k, e in enumerate(vals, start=1):
                running += e
                val = running * Fraction(1 << sum(s), k)  # |U| = k 2^{-|s|}
                if val > best:
                    best = val
                    best_desc = f"top-{k} union of shape {s}"
    return NormReport(
        value=sqrt(float(best)),
        method="parseval",
        error_bound=None,
        params={"norm": "bmo-proxy", "candidate": best_desc,
                "order_cap": family.order_cap, "N": table.point_count,
                "d": table.d, "square": str(best)},
    )


def bmo_energy_cube(table: HaarCoefficientTable) -> Fraction:
    """Exact BMO energy at U = cube: sum over j in N_0^d of
    2^{|j|} sum_m coeff^2, infinite linear tail included."""
    total = Fraction(0)
    for shape in table.shapes(include_constant=False):
        e = table.energy(shape)
        if e:
            total += (1 << sum(shape)) * e
    if table.has_linear:
        full = linear_parseval_axis_sum(None, False) ** table.d
        trunc = linear_parseval_axis_sum(table.max_level, False) ** table.d
        total += table.point_count**2 * (full - trunc)
    return total


# -- norms of finite Haar sums (tables) --------------------------------------

def table_cell_values(table: HaarCoefficientTable,
                      shapes: Sequence[tuple[int, ...]],
                      budget: int = 2**22) -> tuple[list[Fraction], int]:
    """Values of f = sum coeff h over the cells of the common refinement.

    Returns (cell values, total refinement order L); each cell has volume
    2^{-L}.  Only usable for small shape families.
    """
    d = table.d
    levels = [0] * d
    for s in shapes:
        for k in range(d):
            levels[k] = max(levels[k], max(s[k], 0) + 1)
    total_cells = 1 << sum(levels)
    if total_cells > budget:
        raise ResourceLimitError(f"refinement grid has {total_cells} cells")
    shape_data = []
    for s in shapes:
        coeffs = {m: table.coeff(DyadicIndex(s, m)).as_fraction()
                  for m, _v in _all_positions(table, s)}
        shape_data.append((s, coeffs))
    values = []
    for cell in range(total_cells):
        idx = _unpack_cell(cell, levels)
        v = Fraction(0)
        for s, coeffs in shape_data:
            m = []
            sign = 1
            for k in range(d):
                jk = s[k]
                if jk == -1:
                    m.append(0)
                    continue
                mk = idx[k] >> (levels[k] - jk)
                m.append(mk)
                if (idx[k] >> (levels[k] - jk - 1)) & 1:
                    sign = -sign
            c = coeffs.get(tuple(m))
            if c:
                v += sign * c
        values.append(v)
    return values, sum(levels)


def _all_positions(table, shape):
    """Full coefficient support of a shape: sparse entries plus the linear
    part where present (linear is m-independent, so when the table has a
    linear part every position matters)."""
    import itertools
    if table.has_linear:
        for m in itertools.product(*(range(1 << max(j, 0)) for j in shape)):
            yield m, None
    else:
        for m, v in table.sparse_items(shape):
            yield m, v


def _unpack_cell(cell, levels):
    out = []
    for lv in reversed(levels):
        out.append(cell & ((1 << lv) - 1))
        cell >>= lv
    return tuple(reversed(out))


def table_lp_norm(table: HaarCoefficientTable, shapes, p: int,
                  cell_values=None) -> float:
    """||f||_p of the finite Haar sum over ``shapes`` (exact cells, even or
    odd integer p)."""
    if cell_values is None:
        cell_values, order = table_cell_values(table, shapes)
    else:
        cell_values, order = cell_values
    total = sum(abs(v) ** p for v in cell_values)
    return float(Fraction(total, 1 << order)) ** (1.0 / p)


def table_square_function_sup(table: HaarCoefficientTable, shapes) -> float:
    """Exact sup of the square function of the restricted sum: the maximum
    over refinement cells of the per-cell coefficient energy."""
    d = table.d
    levels = [0] * d
    for s in shapes:
        for k in range(d):
            levels[k] = max(levels[k], max(s[k], 0))
    total_cells = 1 << sum(levels)
    if total_cells > 2**22:
        raise ResourceLimitError("refinement grid too large for exact sup")
    best = Fraction(0)
    for cell in range(total_cells):
        idx = _unpack_cell(cell, levels)
        v = Fraction(0)
        for s in shapes:
            m = tuple(
                (idx[k] >> (levels[k] - s[k])) if s[k] >= 0 else 0
                for k in range(d)
            )
            c = table.coeff(DyadicIndex(s, m)).as_fraction()
            if c:
                v += (1 << (2 * sum(max(j, 0) for j in s))) * c * c
        if v > best:
            best = v
    return sqrt(float(best))


def table_square_function_lp(table: HaarCoefficientTable, shapes, p: int) -> float:
    """||Sf||_p on the refinement cells for even p (Sf^2 is cell-wise a
    constant rational, so (Sf^2)^{p/2} is exact)."""
    if p < 2 or p % 2:
        raise DomainError("square-function L_p needs even p")
    d = table.d
    levels = [0] * d
    for s in shapes:
        for k in range(d):
            levels[k] = max(levels[k], max(s[k], 0))
    total_cells = 1 << sum(levels)
    if total_cells > 2**22:
        raise ResourceLimitError("refinement grid too large")
    total = Fraction(0)
    for cell in range(total_cells):
        idx = _unpack_cell(cell, levels)
        v = Fraction(0)
        for s in shapes:
            m = tuple(
                (idx[k] >> (levels[k] - s[k])) if s[k] >= 0 else 0
                for k in range(d)
            )
            c = table.coeff(DyadicIndex(s, m)).as_fraction()
            if c:
                v += (1 << (2 * sum(max(j, 0) for j in s))) * c * c
        total += v ** (p // 2)
    return float(total / total_cells) ** (1.0 / p)


def cww_check(table: HaarCoefficientTable, order: int,
              alpha: float | None = None,
              p_grid: Sequence[int] = (2, 4, 8, 16)) -> dict:
    """Hyperbolic exponential-integrability check for a single-order sum.

    Computes the exp(L^{2/(d-1)}) proxy norm of f = sum_{|j|=order} coeff
    h_{j,m} and the exact sup of its square function; their ratio should
    be bounded by an absolute constant.
    """
    d = table.d
    if alpha is None:
        if d < 2:
            raise DomainError("hyperbolic check needs d >= 2")
        alpha = 2.0 / (d - 1)
    shapes = [s for s in table.shapes() if sum(max(j, 0) for j in s) == order]
    cells = table_cell_values(table, shapes)
    sup_sf = table_square_function_sup(table, shapes)
    if sup_sf == 0.0:
        return {"applicable": False, "reason": "zero function", "order": order}
    proxy = max(p ** (-1.0 / alpha) * table_lp_norm(table, shapes, p, cells)
                for p in p_grid)
    return {
        "applicable": True,
        "order": order,
        "alpha": alpha,
        "exp_norm_proxy": proxy,
        "square_function_sup": sup_sf,
        "ratio": proxy / sup_sf,
        "p_grid": list(p_grid),
    }


def interpolation_check(ps: PointSet, alpha: float, beta: float,
                        p_grid: Sequence[int] = DEFAULT_P_GRID,
                        star_budget: int | None = None,
                        lp_budget: int = DEFAULT_LP_BUDGET) -> dict:
    """Smallest C with ||D||_{exp beta} <= C ||D||_{exp alpha}^{a/b} ||D||_inf^{1-a/b}.

    Proxy norms on both exponential sides, exact star discrepancy for the
    sup norm.
    """
    if not alpha < beta:
        raise DomainError("need alpha < beta")
    lhs = orlicz_norm_proxy(ps, beta, p_grid, budget=lp_budget).value
    base = orlicz_norm_proxy(ps, alpha, p_grid, budget=lp_budget).value
    star = star_discrepancy(ps, budget=star_budget or DEFAULT_STAR_BUDGET).value
    theta = alpha / beta
    rhs = base**theta * star ** (1 - theta)
    return {
        "alpha": alpha,
        "beta": beta,
        "lhs": lhs,
        "rhs_without_constant": rhs,
        "fitted_constant": lhs / rhs if rhs > 0 else math.inf,
        "sup_norm": star,
    }

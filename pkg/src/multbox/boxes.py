"""Periodic rectangle families and box decompositions of hyperbolic sets.

A BoxSpec describes the 1/n-periodic set

    { x : ||n x_j - y_j|| in U_j for every axis j },

where U_j is either the full interval [0, n d_j) or the annular half
[n d_j / 2, n d_j).  All scales are stored as exact Fractions (floats
are dyadic rationals, so conversion is lossless) and every volume and
disjointness statement is decided in exact rational arithmetic.

Two covers of the hyperbolic set A_n = {prod_j ||n x_j - y_j|| < psi(n)}
are built here:

    outer_cover   a union of full boxes containing A_n, one box per
                  dyadic scale tuple (h_{i_1}, ..., h_{i_{k-1}}, tail)
    inner_cover   pairwise disjoint boxes inside A_n whose scale tuples
                  form a full dyadic grid per block, giving the downward
                  closure behind the star-shape property

Admissible systems bundle the inner covers per dyadic block with the
constant-product invariant prod_j d_{i,j} = psi(2^m) / 2^{km} held
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .psi import ApproxFunction, psi_cap, psi_floor

__all__ = [
    "BoxSpec",
    "AdmissibleSystem",
    "axis_measure",
    "box_volume",
    "outer_cover",
    "inner_cover",
    "grid_size",
    "block_of",
    "union_mask",
    "verify_property_P",
    "admissible_system",
    "random_box",
    "box_to_dict",
    "box_from_dict",
]


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(float(v))  # exact: binary floats are dyadic rationals


@dataclass(frozen=True)
class BoxSpec:
    """One periodic rectangle family: modulus, scales, interval types, shift."""

    n: int
    d: tuple
    half: tuple
    y: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("modulus must be >= 1")
        d = tuple(_as_fraction(v) for v in self.d)
        if len(d) == 0:
            raise ValueError("need at least one axis")
        for v in d:
            if not 0 < v <= Fraction(1, self.n):
                raise ValueError(f"scale {v} outside (0, 1/n] for n={self.n}")
        half = tuple(bool(h) for h in self.half)
        if len(half) != len(d):
            raise ValueError("one interval type per axis required")
        y = tuple(float(v) for v in self.y) if len(self.y) else (0.0,) * len(d)
        if len(y) != len(d):
            raise ValueError("shift dimension mismatch")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "half", half)
        object.__setattr__(self, "y", y)

    @property
    def k(self) -> int:
        return len(self.d)

    @property
    def d_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.d])

    def in_strict_window(self) -> bool:
        """True when every scale obeys d_j <= 1/(2n)."""
        return all(v <= Fraction(1, 2 * self.n) for v in self.d)

    def membership(self, x) -> bool:
        xs = np.atleast_2d(np.asarray(x, dtype=float))
        return bool(self.mask(xs)[0])

    def mask(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized membership over points xs of shape (N, k)."""
        xs = np.asarray(xs, dtype=float)
        t = self.n * xs - np.asarray(self.y)
        dist = np.abs(t - np.round(t))
        return self.mask_from_dist(dist)

    def mask_from_dist(self, dist: np.ndarray) -> np.ndarray:
        """Membership given precomputed per-axis torus distances ||n x - y||."""
        nd = self.n * self.d_float
        ok = dist < nd
        for j, h in enumerate(self.half):
            if h:
                ok[:, j] &= dist[:, j] >= nd[j] / 2.0
        return np.all(ok, axis=1)

    def volume(self) -> Fraction:
        v = Fraction(1)
        for dj, hj in zip(self.d, self.half):
            v *= axis_measure(self.n, dj, hj)
        return v

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform points of the box: lattice cell + sign + radial offset."""
        if any(self.n * dj > Fraction(1, 2) for dj in self.d):
            raise ValueError("sampling by radial offset needs n d_j <= 1/2")
        k = self.k
        a = rng.integers(0, self.n, size=(count, k))
        sign = rng.choice((-1.0, 1.0), size=(count, k))
        nd = self.n * self.d_float
        lo = np.where(self.half, nd / 2.0, 0.0)
        t = lo + (nd - lo) * rng.random((count, k))
        x = (a + np.asarray(self.y) + sign * t) / self.n
        return np.mod(x, 1.0)


def axis_measure(n: int, d: Fraction, half: bool) -> Fraction:
    """Measure of { x in [0,1) : ||n x - y|| in U } for one axis.

    The set {||n x - y|| < c} has measure min(2c, 1); subtracting the
    inner disc gives the annular case.
    """
    d = _as_fraction(d)
    full = min(2 * n * d, Fraction(1))
    if not half:
        return full
    inner = min(n * d, Fraction(1))
    return full - inner


def box_volume(box: BoxSpec) -> Fraction:
    return box.volume()


def union_mask(boxes: Sequence[BoxSpec], xs: np.ndarray) -> np.ndarray:
    """Membership in the union; boxes must share modulus and shift."""
    xs = np.asarray(xs, dtype=float)
    if not boxes:
        return np.zeros(len(xs), dtype=bool)
    n = boxes[0].n
    y = np.asarray(boxes[0].y)
    for b in boxes:
        if b.n != n or not np.array_equal(np.asarray(b.y), y):
            raise ValueError("union_mask requires a common modulus and shift")
    t = n * xs - y
    dist = np.abs(t - np.round(t))
    out = np.zeros(len(xs), dtype=bool)
    for b in boxes:
        out |= b.mask_from_dist(dist)
    return out


# ── outer cover ──────────────────────────────────────────────────────────────

def _dyadic_exponent_range(n: int, psi_n: Fraction):
    """Exponents i with psi(n)/n <= 2^-i <= 1/n, smallest i first."""
    # 2^-i <= 1/n  <=>  2^i >= n
    i_lo = max((n - 1).bit_length(), 0)
    # 2^-i >= psi_n / n  <=>  2^i <= n / psi_n
    cap = Fraction(n) / psi_n
    i_hi = i_lo
    while Fraction(2) ** (i_hi + 1) <= cap:
        i_hi += 1
    if Fraction(2) ** i_lo > cap:
        return range(0, 0)
    return range(i_lo, i_hi + 1)


def outer_cover(n: int, psi: ApproxFunction, k: int,
                y: Sequence[float] = ()) -> list[BoxSpec]:
    """Union of full boxes containing A_n; empty if psi(n) = 0.

    Scales run over dyadic h_i in [psi(n)/n, 1/n] on the first k-1 axes;
    the tail axis takes 2^(k-1) * psi(n) / (n^k h_1 ... h_{k-1}), capped
    at 1/n (a capped axis is already the whole circle).  psi(n) >= 2^-k
    degenerates to the single whole-torus box.
    """
    psi_n = _as_fraction(psi(int(n)))
    if psi_n == 0:
        return []
    yv = tuple(y) if len(tuple(y)) else (0.0,) * k
    whole = Fraction(1, n)
    if psi_n >= Fraction(1, 2 ** k):
        return [BoxSpec(n, (whole,) * k, (False,) * k, yv)]
    if k == 1:
        return [BoxSpec(n, (min(psi_n / n, whole),), (False,), yv)]
    exps = _dyadic_exponent_range(n, psi_n)
    boxes = []
    for tup in iproduct(exps, repeat=k - 1):
        hs = [Fraction(1, 2 ** i) for i in tup]
        prod = Fraction(1)
        for h in hs:
            prod *= h
        tail = 2 ** (k - 1) * psi_n / (Fraction(n) ** k * prod)
        hs.append(min(tail, whole))
        boxes.append(BoxSpec(n, tuple(hs), (False,) * k, yv))
    return boxes


# ── inner cover / admissible systems ─────────────────────────────────────────

def block_of(n: int) -> int:
    """The m with 2^(m-1) <= n < 2^m."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    return n.bit_length()


def grid_size(m: int, k: int, tau: float) -> int:
    """Cardinality of the block-m scale grid once the block is feasible.

    The ladder between the pinch exponents holds r = e_minus - e_plus + 1
    rungs and the grid takes one rung per non-tail axis, so the count is
    r^(k-1); it grows like (2 tau m / k)^(k-1) for large m.
    """
    e_minus = math.ceil(m * (1 + (1 + tau) / k))
    e_plus = max(math.ceil(m * (1 + (1 - tau) / k)), m + 2)
    r = max(0, e_minus - e_plus + 1)
    return r ** (k - 1)


def _block_scale_rows(m: int, k: int, tau: float, psi_at_block: Fraction):
    """Scale/type rows for one dyadic block, or [] when infeasible.

    Ladder exponents: d runs over powers of two between
    2^-e_minus (type Full at the bottom rung) and 2^-e_plus, with
    e_minus = ceil(m (1 + (1+tau)/k)) and
    e_plus = max(ceil(m (1 + (1-tau)/k)), m + 2).
    The tail scale is pinned by the exact product constraint
    prod_j d_{i,j} = psi(2^m) / 2^{km}.
    """
    if psi_at_block <= 0:
        return []
    e_minus = math.ceil(m * (1 + (1 + tau) / k))
    e_plus = max(math.ceil(m * (1 + (1 - tau) / k)), m + 2)
    if e_plus > e_minus:
        return []
    ladder = [Fraction(1, 2 ** e) for e in range(e_plus, e_minus + 1)]
    d_min = ladder[-1]
    target = psi_at_block / Fraction(2) ** (k * m)
    rows = []
    for tup in iproduct(ladder, repeat=k - 1):
        prod = Fraction(1)
        for v in tup:
            prod *= v
        tail = target / prod
        if not 0 < tail <= Fraction(1, 2 ** (m + 1)):
            return []  # block too early for the scale window; skip whole block
        d_row = tup + (tail,)
        half_row = tuple(v != d_min for v in tup) + (False,)
        rows.append((d_row, half_row))
    return rows


def inner_cover(n: int, m: int, psi: ApproxFunction, k: int, tau: float,
                y: Sequence[float] = ()) -> list[BoxSpec]:
    """Disjoint boxes inside A_n for n in block m; may be empty.

    psi must already carry the floor and cap reductions (see
    admissible_system, which applies them); monotonicity of psi makes
    prod_j (n d_j) = n^k psi(2^m)/2^{km} <= psi(2^m) <= psi(n).
    """
    if block_of(n) != m:
        raise ValueError(f"n={n} lies outside block m={m}")
    if not 0 < tau < 1 / k:
        raise ValueError("tau must lie in (0, 1/k)")
    rows = _block_scale_rows(m, k, tau, _as_fraction(psi(2 ** m)))
    yv = tuple(y) if len(tuple(y)) else (0.0,) * k
    return [BoxSpec(n, d_row, half_row, yv) for d_row, half_row in rows]


@dataclass(frozen=True)
class AdmissibleSystem:
    """Per-block scale grids with the exact constant-product invariant."""

    k: int
    tau: float
    psi: ApproxFunction  # effective threshold: floor and cap applied
    m_min: int
    m_max: int
    y: tuple
    blocks: Mapping[int, tuple]

    def rows(self, m: int) -> tuple:
        return self.blocks.get(m, ())

    def index_count(self, m: int) -> int:
        return len(self.rows(m))

    def scale_product(self, m: int) -> Fraction:
        """prod_j d_{i,j}, identical for every i in the block."""
        rows = self.rows(m)
        if not rows:
            return Fraction(0)
        prod = Fraction(1)
        for v in rows[0][0]:
            prod *= v
        return prod

    def boxes_for(self, n: int) -> list[BoxSpec]:
        m = block_of(n)
        return [BoxSpec(n, d_row, half_row, self.y)
                for d_row, half_row in self.rows(m)]

    def moduli(self) -> range:
        return range(2 ** (self.m_min - 1), 2 ** self.m_max)

    def window_constants(self) -> tuple:
        """Range of d_{i,j} 2^{m(1+1/k)} across blocks, the pinch record."""
        lo, hi = math.inf, 0.0
        for m in range(self.m_min, self.m_max + 1):
            for d_row, _ in self.rows(m):
                for v in d_row:
                    r = float(v) * 2.0 ** (m * (1 + 1 / self.k))
                    lo, hi = min(lo, r), max(hi, r)
        return lo, hi


def admissible_system(psi: ApproxFunction, tau: float, m_max: int, k: int,
                      y: Sequence[float] = (), m_min: int = 1,
                      preprocess: bool = True) -> AdmissibleSystem:
    """Assemble per-block inner-cover grids from a raw threshold family.

    The floor (mass per block) and cap (scale window) reductions are
    applied first unless preprocess is disabled, in which case psi is
    trusted to satisfy psi(2^m) <= 2^-(m+1) already.
    """
    if not 0 < tau < 1 / k:
        raise ValueError("tau must lie in (0, 1/k)")
    if m_max < m_min:
        raise ValueError("need m_max >= m_min")
    eff = psi_cap(psi_floor(psi, k)) if preprocess else psi
    yv = tuple(y) if len(tuple(y)) else (0.0,) * k
    blocks = {}
    for m in range(m_min, m_max + 1):
        # the inclusion argument needs psi(n) >= psi(2^m) across the block;
        # floored families vanish below n=3, so early blocks are dropped
        ns = np.arange(2 ** (m - 1), 2 ** m)
        if float(np.min(eff(ns))) < float(eff(2 ** m)):
            continue
        rows = _block_scale_rows(m, k, tau, _as_fraction(eff(2 ** m)))
        if rows:
            blocks[m] = tuple(rows)
    return AdmissibleSystem(k=k, tau=tau, psi=eff, m_min=m_min, m_max=m_max,
                            y=yv, blocks=blocks)


# ── star-shape property ──────────────────────────────────────────────────────

def verify_property_P(boxes: Sequence[BoxSpec], trials: int,
                      rng: np.random.Generator) -> int:
    """Count componentwise-shrink violations over randomized trials.

    Draw x in a random box of the union, shrink each torus distance by a
    uniform factor (re-randomizing lattice cell and sign), and test that
    the shrunk point stays in the union.  Returns the violation count.
    """
    if not boxes:
        return 0
    n = boxes[0].n
    y = np.asarray(boxes[0].y)
    k = boxes[0].k
    violations = 0
    per = max(1, trials // len(boxes))
    for box in boxes:
        xs = box.sample(rng, per)
        t = n * xs - y
        dist = np.abs(t - np.round(t))
        factors = rng.random((per, k))
        shrunk = dist * factors
        a = rng.integers(0, n, size=(per, k))
        sign = rng.choice((-1.0, 1.0), size=(per, k))
        zs = np.mod((a + y + sign * shrunk) / n, 1.0)
        ok = union_mask(boxes, zs)
        violations += int(np.sum(~ok))
    return violations


# ── utilities ────────────────────────────────────────────────────────────────

def random_box(rng: np.random.Generator, k: int, n: int,
               extra_levels: int = 6, shift: bool = True) -> BoxSpec:
    """A random dyadic box in the strict window d_j <= 1/(2n)."""
    e0 = (2 * n - 1).bit_length()  # smallest e with 2^-e <= 1/(2n)
    es = rng.integers(e0, e0 + extra_levels, size=k)
    d = tuple(Fraction(1, 2 ** int(e)) for e in es)
    half = tuple(bool(v) for v in rng.integers(0, 2, size=k))
    if shift:
        y = tuple(float(v) for v in rng.integers(0, 2 ** 12, size=k) / 2 ** 12)
    else:
        y = (0.0,) * k
    return BoxSpec(n, d, half, y)


def box_to_dict(box: BoxSpec) -> dict:
    return {
        "n": box.n,
        "scales": [str(v) for v in box.d],
        "half": list(box.half),
        "shift": list(box.y),
    }


def box_from_dict(data: dict) -> BoxSpec:
    return BoxSpec(
        int(data["n"]),
        tuple(Fraction(s) for s in data["scales"]),
        tuple(bool(h) for h in data["half"]),
        tuple(float(v) for v in data["shift"]),
    )

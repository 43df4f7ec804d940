"""Smoothed periodic windows over box families and their Fourier side.

The periodization of a product bump window over the lattice (a + y)/n,

    A*(x) = sum_{a in Z^k} prod_j b_j((x_j - (a_j + y_j)/n) / d_j),

has Fourier coefficients supported exactly on n Z^k.  The complete
exponential sum over the n^k lattice cells is collapsed symbolically, so
off-lattice coefficients are identically zero rather than numerically
small; on the lattice,

    A*^(n t) = n^k e(-<t, y>) prod_j d_j b_j^(d_j n t_j),

a pure product of cached axis transforms.  Smoothed systems dress each
admissible row with one window per axis, annular on the half axes and
inner on the full axes, so the smoothed sum f_n sits below the indicator
of the disjoint union of its boxes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .boxes import AdmissibleSystem, BoxSpec, block_of
from .bumps import BumpFunction

__all__ = [
    "WindowProduct",
    "SmoothedSystem",
    "smoothed_system",
    "window_transform",
    "an_star_spatial",
    "An_star_coefficient",
    "lambda_An_star",
    "lambda_An_star_sq",
    "normalized_coefficient",
    "shell_decay_scan",
    "parseval_check",
    "f_n_eval",
]


# ── product windows ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WindowProduct:
    """A box dressed with one even bump per axis, supported inside it."""

    box: BoxSpec
    bumps: tuple

    def __post_init__(self):
        bumps = tuple(self.bumps)
        if len(bumps) != self.box.k:
            raise ValueError("one bump per axis required")
        for b, h in zip(bumps, self.box.half):
            if b.support_radius > 1.0:
                raise ValueError("window support must stay inside the box")
            if h and b.kind != "annular":
                raise ValueError("half axes take annular windows")
        object.__setattr__(self, "bumps", bumps)

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def k(self) -> int:
        return self.box.k

    def single_term(self) -> bool:
        """True when neighboring lattice translates cannot overlap."""
        n = self.box.n
        return all(float(dj) * b.support_radius <= 0.5 / n
                   for dj, b in zip(self.box.d, self.bumps))


def window_transform(w: WindowProduct, xi) -> float:
    """Rectangle transform prod_j d_j b_j^(d_j xi_j); real by evenness."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (w.k,):
        raise ValueError("frequency vector dimension mismatch")
    out = 1.0
    for j, (dj, b) in enumerate(zip(w.box.d, w.bumps)):
        dv = float(dj)
        out *= dv * b.transform(dv * float(xi[j]))
    return out


def an_star_spatial(w: WindowProduct, x):
    """Pointwise periodized window, summing every translate reaching x.

    Separable: the per-axis sums over lattice offsets are multiplied, so
    overlapping translates (support wider than half a period) are summed
    correctly rather than truncated to the nearest cell.
    """
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    n = w.box.n
    out = np.ones(len(xs))
    for j, (dj, b) in enumerate(zip(w.box.d, w.bumps)):
        dv = float(dj)
        reach = int(math.floor(n * dv * b.support_radius)) + 1
        u = xs[:, j] - w.box.y[j] / n
        a0 = np.round(n * u)
        acc = np.zeros(len(xs))
        for off in range(-reach, reach + 1):
            acc += b((u - (a0 + off) / n) / dv)
        out *= acc
    if np.ndim(x) == 1:
        return float(out[0])
    return out


# ── exact Fourier coefficients ───────────────────────────────────────────────

def An_star_coefficient(w: WindowProduct, xi) -> complex:
    """Coefficient of the periodized window at an integer frequency.

    The cell sum over a in {0..n-1}^k is evaluated symbolically: it is
    n^k when n divides every component and zero otherwise, so the
    support statement holds exactly.  On xi = n t the surviving phase is
    e(-<t, y>).
    """
    n = w.box.n
    t = []
    for v in np.asarray(xi).reshape(-1).tolist():
        iv = int(round(v))
        if iv != v:
            raise ValueError("frequency vectors must be integral")
        if iv % n != 0:
            return 0j
        t.append(iv // n)
    if len(t) != w.k:
        raise ValueError("frequency vector dimension mismatch")
    phase = cmath.exp(-2j * math.pi * float(np.dot(t, w.box.y)))
    return (float(n) ** w.k) * phase * window_transform(
        w, np.asarray(xi, dtype=float).reshape(-1))


def lambda_An_star(w: WindowProduct) -> float:
    """Mass of the periodized window: n^k prod_j d_j ||b_j||_1."""
    out = float(w.box.n) ** w.k
    for dj, b in zip(w.box.d, w.bumps):
        out *= float(dj) * b.l1_norm
    return out


def lambda_An_star_sq(w: WindowProduct) -> float:
    """Mass of the squared window, prod_j n d_j ||b_j^2||_1.

    The product identity needs disjoint translates; overlapping supports
    would pick up cross terms.
    """
    if not w.single_term():
        raise ValueError("squared-mass product identity needs "
                         "non-overlapping translates")
    out = 1.0
    for dj, b in zip(w.box.d, w.bumps):
        out *= w.box.n * float(dj) * b.l2sq_norm
    return out


def normalized_coefficient(w: WindowProduct, xi) -> complex:
    """a_n(xi) = A*^(xi) / lambda(A*), modulus at most one."""
    lam = lambda_An_star(w)
    if not lam > 0.0:
        raise ValueError("window carries no mass")
    return An_star_coefficient(w, xi) / lam


def shell_decay_scan(w: WindowProduct, L: int = 4, m_max: int = 8,
                     samples: int = 32,
                     rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Max of |b_R^(xi)| 2^{mL} / prod(d) over dyadic dual shells.

    Shell m is 2^m R* minus 2^{m-1} R* for the dual rectangle R* with
    axis radii 1/d_j; in rescaled coordinates u_j = d_j xi_j that is the
    sup-norm annulus 2^{m-1} < |u|_inf <= 2^m, sampled directly.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    out = []
    for m in range(1, m_max + 1):
        best = 0.0
        count = 0
        while count < samples:
            u = rng.uniform(-1.0, 1.0, size=w.k) * 2.0 ** m
            if np.max(np.abs(u)) <= 2.0 ** (m - 1):
                continue
            count += 1
            val = 1.0
            for j, b in enumerate(w.bumps):
                val *= abs(b.transform(float(u[j])))
            best = max(best, val * 2.0 ** (m * L))
        out.append(best)
    return np.array(out)


def parseval_check(w: WindowProduct, cutoff: int) -> float:
    """Residual of the truncated Plancherel identity for the window.

    Returns lambda((A*)^2) minus the coefficient energy over the cube
    |xi|_inf <= cutoff; both sides factor per axis, so the truncated sum
    is a product of one-axis sums over multiples of n.  The residual is
    a nonnegative tail, shrinking as the cutoff grows.
    """
    n = w.box.n
    cutoff = int(cutoff)
    if cutoff <= 0 or cutoff % n != 0:
        raise ValueError("cutoff must be a positive multiple of n")
    spatial = lambda_An_star_sq(w)
    tmax = cutoff // n
    ts = np.arange(-tmax, tmax + 1).astype(float)
    fourier = 1.0
    for dj, b in zip(w.box.d, w.bumps):
        dv = float(dj)
        vals = b.transform_many(dv * n * ts)
        fourier *= float(np.sum((n * dv * vals) ** 2))
    return spatial - fourier


# ── smoothed admissible systems ──────────────────────────────────────────────

@dataclass(frozen=True)
class SmoothedSystem:
    """Admissible rows dressed with windows, one bump shape per axis type.

    Every row window sits inside its half-open box, and the rows of a
    block are pairwise disjoint, so f_n = sum of row windows stays in
    [0, 1] and below the indicator of the union.
    """

    base: AdmissibleSystem
    inner: BumpFunction = BumpFunction("inner")
    annular: BumpFunction = BumpFunction("annular")

    def __post_init__(self):
        if self.inner.kind != "inner":
            raise ValueError("full axes take inner windows")
        if self.annular.kind != "annular":
            raise ValueError("half axes take annular windows")

    def windows_for(self, n: int) -> list:
        return [WindowProduct(box, tuple(self.annular if h else self.inner
                                         for h in box.half))
                for box in self.base.boxes_for(n)]

    def weight(self, m: int) -> float:
        """w_m = sum_i prod_j d_{i,j} ||b_{i,j}||_1, the modulus-free part
        of the smoothed mass; lambda(f_n) = n^k w_m across the block."""
        li = self.inner.l1_norm
        la = self.annular.l1_norm
        dprod = float(self.base.scale_product(m))
        total = 0.0
        for _, half_row in self.base.rows(m):
            norms = 1.0
            for h in half_row:
                norms *= la if h else li
            total += norms
        return dprod * total

    def lambda_f(self, n: int) -> float:
        return float(n) ** self.base.k * self.weight(block_of(n))

    def eval(self, n: int, x):
        xs = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(len(xs))
        for w in self.windows_for(n):
            out += an_star_spatial(w, xs)
        if np.ndim(x) == 1:
            return float(out[0])
        return out


def smoothed_system(base: AdmissibleSystem,
                    plateau: Optional[float] = None) -> SmoothedSystem:
    """Dress a system with the default bump pair, optionally plateaued."""
    return SmoothedSystem(base, BumpFunction("inner", plateau),
                          BumpFunction("annular", plateau))


def f_n_eval(s: SmoothedSystem, n: int, x):
    """Smoothed block function at x: sum of row windows for block_of(n)."""
    return s.eval(n, x)

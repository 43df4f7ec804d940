"""Torus arithmetic and multiplicative approximation sets.

The central object is the 1/n-periodic set

    A_n(psi, y) = { x in [0,1)^k : ||n x_1 - y_1|| * ... * ||n x_k - y_k|| < psi(n) },

where ||.|| is the distance to the nearest integer.  Its Lebesgue volume
has a closed form through the volume of the region cut out of the unit
cube by the coordinate-product inequality x_1 ... x_k <= rho, so the
volume depends on psi(n) only and neither on the modulus n nor on the
shift y.  Membership near the threshold is catastrophically cancellative
in 64-bit arithmetic, so a high-precision adjudicator backs every
comparison that lands within 1e-12 of the cut.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .psi import ApproxFunction

__all__ = [
    "nearest_int_dist",
    "mult_error",
    "mult_error_hp",
    "in_A_times",
    "membership_mask",
    "hyperbolic_volume",
    "lambda_A_times",
    "solution_count",
    "liminf_statistic",
]

#: comparisons closer to the threshold than this are re-run in high precision
ADJUDICATION_MARGIN = 1e-12


def nearest_int_dist(x):
    """Distance from x to the nearest integer, in [0, 1/2].

    Accepts scalars or arrays; rejects non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("nearest_int_dist requires finite input")
    out = np.abs(arr - np.round(arr))
    if arr.ndim == 0:
        return float(out)
    return out


def mult_error(x: Sequence[float], n: int, y: Sequence[float] | None = None) -> float:
    """prod_j ||n x_j - y_j||, the multiplicative approximation error.

    Lies in [0, 2^-k].  Invariant under x_j -> x_j + m/n for integer m.
    """
    xv = np.asarray(x, dtype=float)
    if n < 1:
        raise ValueError("modulus must be >= 1")
    yv = _shift_vector(y, xv.shape[-1])
    return float(np.prod(nearest_int_dist(n * xv - yv)))


def _shift_vector(y, k: int) -> np.ndarray:
    if y is None:
        return np.zeros(k)
    yv = np.asarray(y, dtype=float)
    if yv.ndim == 0:
        yv = np.full(k, float(yv))
    if yv.shape != (k,):
        raise ValueError(f"shift has shape {yv.shape}, expected ({k},)")
    if not np.all(np.isfinite(yv)):
        raise ValueError("shift must be finite")
    return yv


def mult_error_hp(x: Sequence[float], n: int, y: Sequence[float] | None = None,
                  digits: int = 50) -> mpmath.mpf:
    """High-precision mult_error; inputs are taken at their exact binary values."""
    xv = np.asarray(x, dtype=float)
    yv = _shift_vector(y, xv.shape[-1])
    with mpmath.workdps(digits):
        prod = mpmath.mpf(1)
        for xj, yj in zip(xv, yv):
            t = n * mpmath.mpf(float(xj)) - mpmath.mpf(float(yj))
            prod *= abs(t - mpmath.nint(t))
        return +prod


def in_A_times(x: Sequence[float], n: int, psi: ApproxFunction,
               y: Sequence[float] | None = None, digits: int = 50) -> bool:
    """Strict membership test mult_error(x, n, y) < psi(n).

    A float evaluation decides unless it lands within ADJUDICATION_MARGIN
    of the threshold, in which case the high-precision path adjudicates.
    """
    thr = psi(int(n))
    if thr <= 0.0:
        return False
    err = mult_error(x, n, y)
    if abs(err - thr) < ADJUDICATION_MARGIN:
        return bool(mult_error_hp(x, n, y, digits=digits) < thr)
    return err < thr


def membership_mask(xs: np.ndarray, n: int, threshold: float,
                    y: Sequence[float] | None = None) -> np.ndarray:
    """Vectorized strict membership for a batch of points xs (shape (N, k))."""
    xs = np.asarray(xs, dtype=float)
    yv = _shift_vector(y, xs.shape[1])
    t = n * xs - yv
    err = np.prod(np.abs(t - np.round(t)), axis=1)
    return err < threshold


def hyperbolic_volume(k: int, rho: float) -> float:
    """Volume of { x in [0,1]^k : x_1 x_2 ... x_k <= rho }.

    Equals rho * sum_{s=0}^{k-1} (-log rho)^s / s! for 0 < rho < 1
    (natural logs), 1 for rho >= 1, and 0 at rho = 0.  Nondecreasing in
    rho and continuous at rho = 1.
    """
    if k < 1:
        raise ValueError("dimension must be >= 1")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if rho == 0.0:
        return 0.0
    if rho >= 1.0:
        return 1.0
    L = -math.log(rho)
    term = 1.0
    acc = 1.0
    for s in range(1, k):
        term *= L / s
        acc += term
    return rho * acc


def lambda_A_times(k: int, n: int, psi: ApproxFunction,
                   y: Sequence[float] | None = None) -> float:
    """Exact volume of A_n(psi, y): hyperbolic_volume(k, 2^k * psi(n)).

    Independent of n and y; both arguments are accepted so call sites
    read naturally and so the independence stays testable.
    """
    del y
    return hyperbolic_volume(k, (2.0 ** k) * psi(int(n)))


def solution_count(x: Sequence[float], psi: ApproxFunction,
                   y: Sequence[float] | None = None, N: int = 1000,
                   adjudicate: bool = True) -> list[int]:
    """All moduli n <= N with x in A_n(psi, y), in increasing order.

    The scan is vectorized; near-threshold moduli are re-adjudicated in
    high precision when adjudicate is set.
    """
    if N < 1:
        raise ValueError("horizon must be >= 1")
    xv = np.asarray(x, dtype=float)
    k = xv.shape[-1]
    yv = _shift_vector(y, k)
    hits: list[int] = []
    chunk = 1 << 16
    for lo in range(1, N + 1, chunk):
        ns = np.arange(lo, min(lo + chunk, N + 1), dtype=np.int64)
        thr = np.atleast_1d(psi(ns))
        t = ns[:, None] * xv[None, :] - yv[None, :]
        err = np.prod(np.abs(t - np.round(t)), axis=1)
        mask = err < thr
        near = np.abs(err - thr) < ADJUDICATION_MARGIN
        if adjudicate and np.any(near):
            for idx in np.nonzero(near)[0]:
                n_i = int(ns[idx])
                mask[idx] = mult_error_hp(xv, n_i, yv) < psi(n_i)
        mask &= thr > 0.0
        hits.extend(int(v) for v in ns[mask])
    return hits


def liminf_statistic(x: Sequence[float], N: int) -> float:
    """min_{3 <= n <= N} n (log n)^2 ||n x_1|| ||n x_2||.

    A running minimum, hence non-increasing in N.  Vanishing of the
    limit along almost every line is the Chow-Yang phenomenon; here we
    only expose the finite-horizon statistic.
    """
    if N < 3:
        raise ValueError("horizon must be >= 3")
    x1, x2 = float(x[0]), float(x[1])
    best = math.inf
    chunk = 1 << 18
    for lo in range(3, N + 1, chunk):
        ns = np.arange(lo, min(lo + chunk, N + 1), dtype=np.float64)
        t1 = ns * x1
        t2 = ns * x2
        d1 = np.abs(t1 - np.round(t1))
        d2 = np.abs(t2 - np.round(t2))
        vals = ns * np.log(ns) ** 2 * d1 * d2
        best = min(best, float(vals.min()))
    return best

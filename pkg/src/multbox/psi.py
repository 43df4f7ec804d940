"""Threshold function families psi: N -> [0, 1).

A threshold function assigns to each modulus n the size psi(n) of the
multiplicative approximation target.  Families are numpy-aware: calling
them with an integer array returns an array of values.  Each family
carries a monotone flag (checked lazily, never assumed) and an optional
decay floor eps meaning psi(n) <= C * n^(-eps) on the sampled range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "ApproxFunction",
    "PowerLaw",
    "LogPower",
    "LogFloor",
    "Table",
    "SquaresOnly",
    "PointwiseMax",
    "PointwiseMin",
    "psi_floor",
    "psi_cap",
]


@dataclass(frozen=True)
class ApproxFunction:
    """Base threshold family.  Subclasses implement _values on int arrays."""

    monotone: bool = field(default=False, init=False)
    decay_floor: Optional[float] = field(default=None, init=False)

    def _values(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, n):
        arr = np.asarray(n)
        if not np.issubdtype(arr.dtype, np.integer):
            raise TypeError("modulus must be integral")
        if np.any(arr < 1):
            raise ValueError("modulus must be >= 1")
        out = self._values(arr.astype(np.int64))
        if arr.ndim == 0:
            return float(out)
        return out

    @property
    def name(self) -> str:
        return type(self).__name__

    def check_range(self, n_max: int = 4096) -> None:
        """Verify 0 <= psi(n) < 1 on an initial segment; raise otherwise."""
        ns = np.arange(1, n_max + 1)
        vals = self(ns)
        if np.any(vals < 0) or np.any(vals >= 1):
            bad = int(ns[(vals < 0) | (vals >= 1)][0])
            raise ValueError(f"psi({bad}) = {self(bad)} outside [0, 1)")


@dataclass(frozen=True)
class PowerLaw(ApproxFunction):
    """psi(n) = c * n^(-tau) with 0 <= c < 1 and tau >= 0."""

    c: float = 1 / 4
    tau: float = 1.0

    def __post_init__(self):
        if not 0 <= self.c < 1:
            raise ValueError("need 0 <= c < 1 so that psi(1) < 1")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        object.__setattr__(self, "monotone", True)
        object.__setattr__(self, "decay_floor", self.tau if self.tau > 0 else None)

    def _values(self, n):
        return self.c * np.power(n, -self.tau, dtype=float)

    @property
    def name(self):
        return f"PowerLaw(c={self.c}, tau={self.tau})"


@dataclass(frozen=True)
class LogPower(ApproxFunction):
    """psi(n) = 1 / (n * (log n)^a) for n >= 3, else 0.

    The series sum psi(n) (log n)^(k-1) converges iff a > k, which makes
    this the family of choice for threshold experiments.  Values at
    n < 3 are zeroed: log 1 = 0 breaks the formula and 1/(2 (log 2)^a)
    can exceed 1, while finitely many terms never affect a limsup set.
    """

    a: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "monotone", False)
        object.__setattr__(self, "decay_floor", 1.0)

    def _values(self, n):
        safe = np.maximum(n, 3)
        vals = 1.0 / (safe * np.log(safe) ** self.a)
        return np.where(n >= 3, vals, 0.0)

    @property
    def name(self):
        return f"LogPower(a={self.a})"


@dataclass(frozen=True)
class LogFloor(ApproxFunction):
    """psi_L(n) = 1 / (n * (log n)^(k+1)) for n >= 3, else 0."""

    k: int = 2

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("floor family needs k >= 2")
        object.__setattr__(self, "decay_floor", 1.0)

    def _values(self, n):
        safe = np.maximum(n, 3)
        vals = 1.0 / (safe * np.log(safe) ** (self.k + 1))
        return np.where(n >= 3, vals, 0.0)

    @property
    def name(self):
        return f"LogFloor(k={self.k})"


@dataclass(frozen=True)
class Table(ApproxFunction):
    """Explicit values indexed from n = 1; zero beyond the table."""

    values: Sequence[float] = ()

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(not 0 <= v < 1 for v in vals):
            raise ValueError("table values must lie in [0, 1)")
        object.__setattr__(self, "values", vals)
        mono = all(b <= a for a, b in zip(vals, vals[1:]))
        object.__setattr__(self, "monotone", mono)

    def _values(self, n):
        table = np.asarray(self.values + (0.0,))
        idx = np.minimum(n - 1, len(self.values))
        return table[idx]

    @property
    def name(self):
        return f"Table(len={len(self.values)})"


@dataclass(frozen=True)
class SquaresOnly(ApproxFunction):
    """psi(n) = n^(-1/2) * (log n)^(-k) when n is a perfect square, else 0.

    Supported on squares only, so sum psi(n) (log n)^(k-1) diverges while
    the simultaneous counterpart sum psi(n)^k converges for k >= 2.
    """

    k: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "decay_floor", 0.5)

    def _values(self, n):
        roots = np.floor(np.sqrt(n.astype(float)) + 0.5).astype(np.int64)
        is_square = roots * roots == n
        safe = np.maximum(n, 4)
        vals = 1.0 / (np.sqrt(safe) * np.log(safe) ** self.k)
        return np.where(is_square & (n >= 4), vals, 0.0)

    @property
    def name(self):
        return f"SquaresOnly(k={self.k})"


@dataclass(frozen=True)
class PointwiseMax(ApproxFunction):
    """max(psi_a, psi_b) pointwise; monotone if both components are."""

    a: ApproxFunction = None
    b: ApproxFunction = None

    def __post_init__(self):
        object.__setattr__(self, "monotone", self.a.monotone and self.b.monotone)

    def _values(self, n):
        return np.maximum(self.a(n), self.b(n))

    @property
    def name(self):
        return f"max({self.a.name}, {self.b.name})"


@dataclass(frozen=True)
class PointwiseMin(ApproxFunction):
    a: ApproxFunction = None
    b: ApproxFunction = None

    def __post_init__(self):
        object.__setattr__(self, "monotone", self.a.monotone and self.b.monotone)

    def _values(self, n):
        return np.minimum(self.a(n), self.b(n))

    @property
    def name(self):
        return f"min({self.a.name}, {self.b.name})"


@dataclass(frozen=True)
class _HalfModulus(ApproxFunction):
    """The cap family 1/(2n)."""

    def __post_init__(self):
        object.__setattr__(self, "monotone", True)
        object.__setattr__(self, "decay_floor", 1.0)

    def _values(self, n):
        return 1.0 / (2.0 * n)

    @property
    def name(self):
        return "1/(2n)"


def psi_floor(psi: ApproxFunction, k: int) -> ApproxFunction:
    """Pointwise max of psi with the slow floor 1/(n (log n)^(k+1)).

    Raising psi to the floor can only enlarge the approximation sets, and
    the floor's own series converges, so limsup behaviour is unchanged;
    the floor guarantees enough mass per dyadic block for box packings.
    """
    return PointwiseMax(a=psi, b=LogFloor(k=k))


def psi_cap(psi: ApproxFunction) -> ApproxFunction:
    """Pointwise min of psi with 1/(2n).

    Below 1/(2n) every per-axis distance can be forced under 1/(2n) at
    scale windows d <= 1/(2n); capping changes membership only at moduli
    where psi(n) > 1/(2n).
    """
    return PointwiseMin(a=psi, b=_HalfModulus())


def partial_sum_weighted(psi: ApproxFunction, k: int, N: int) -> float:
    """sum_{n <= N} psi(n) * (log n)^(k-1), the divergence-test statistic."""
    ns = np.arange(3, N + 1)
    if len(ns) == 0:
        return 0.0
    return float(np.sum(psi(ns) * np.log(ns) ** (k - 1)))

"""Diophantine exponent estimators and exhaustive lattice counting oracles.

Two kinds of machinery live here.  The exponent side measures how well the
coordinates of a point (or the coefficients of a hyperplane) are approximated
by rationals: continued fractions give exact convergents in one dimension,
and record scans over integer frequencies estimate the simultaneous, dual
and multiplicative exponents.  The counting side enumerates the integer
frequency vectors that survive the box and tube constraints appearing in the
second-moment analysis: the single-modulus tube count, the two-modulus pair
count with its parallel / non-parallel split, the gcd lattice of difference
vectors, and the exact gcd sums controlling the set-level error term.

All counts are exact enumerations with a hard candidate budget; anything
larger is refused rather than estimated.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from mpmath import mp

from .boxes import AdmissibleSystem
from .errors import BudgetExceeded

ENUM_BUDGET = 10 ** 8
STABILITY_DELTA = 0.05
KINDS = ("simultaneous", "dual", "multiplicative")

# chunk rows so the broadcast (chunk, partner, k) block stays a few MB
_PAIR_CHUNK = 1 << 18


# ── continued fractions ──────────────────────────────────────────────────────

@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients with exact integer convergents.

    ``exact`` marks a terminating expansion (rational input); the convergent
    list then stops at the final exact value.
    """

    quotients: tuple
    convergents: tuple  # (p, q) pairs, exact integers
    exact: bool

    def __post_init__(self):
        for (_, qa), (_, qb) in zip(self.convergents, self.convergents[1:]):
            # q_1 = q_0 = 1 happens when a_1 = 1; strictly increasing after
            if qb < qa or (qb == qa and qa > 1):
                raise ValueError("convergent denominators must increase")


def _as_mpf(alpha):
    if callable(alpha):
        return mp.mpf(alpha())
    if isinstance(alpha, Fraction):
        return mp.mpf(alpha.numerator) / alpha.denominator
    if isinstance(alpha, str):
        return mp.mpf(alpha)
    return mp.mpf(alpha)


def continued_fraction(alpha, depth: int, dps: Optional[int] = None
                       ) -> ContinuedFraction:
    """Standard expansion of a real number to ``depth`` partial quotients.

    ``alpha`` may be a number, a Fraction (handled by exact integer
    arithmetic), a decimal string, or a zero-argument callable evaluated at
    working precision.  Running out of precision before ``depth`` quotients
    raises rather than returning junk quotients.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if isinstance(alpha, Fraction):
        return _rational_cf(alpha, depth)
    if isinstance(alpha, float):
        # floats are exact dyadic rationals; expand them without rounding
        return _rational_cf(Fraction(alpha), depth)
    dps = dps if dps is not None else max(60, 6 * depth)
    with mp.workdps(dps):
        x = _as_mpf(alpha)
        guard = mp.mpf(10) ** (15 - dps)
        # convergents are trustworthy only while q^2 stays well inside
        # the working precision
        q_limit = 10 ** max(1, dps - 10)
        quotients = []
        p_prev, p = 1, None
        q_prev, q = 0, None
        convergents = []
        exact = False
        for _ in range(depth):
            if q is not None and q * q > q_limit:
                raise ValueError(
                    "precision exhausted before reaching the requested depth")
            a = int(mp.floor(x))
            quotients.append(a)
            if p is None:
                p, q = a, 1
            else:
                p, p_prev = a * p + p_prev, p
                q, q_prev = a * q + q_prev, q
            convergents.append((p, q))
            frac = x - a
            if frac == 0:
                exact = True
                break
            if frac < guard:
                raise ValueError(
                    "precision exhausted before reaching the requested depth")
            x = 1 / frac
    return ContinuedFraction(tuple(quotients), tuple(convergents), exact)


def _rational_cf(alpha: Fraction, depth: int) -> ContinuedFraction:
    num, den = alpha.numerator, alpha.denominator
    quotients = []
    p_prev, p = 1, None
    q_prev, q = 0, None
    convergents = []
    exact = False
    for _ in range(depth):
        a, rem = divmod(num, den)
        quotients.append(a)
        if p is None:
            p, q = a, 1
        else:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        convergents.append((p, q))
        if rem == 0:
            exact = True
            break
        num, den = den, rem
    return ContinuedFraction(tuple(quotients), tuple(convergents), exact)


# ── exponent records ─────────────────────────────────────────────────────────

def trivial_exponent_bound(kind: str, k: int) -> float:
    """Dirichlet-type lower bound for the exponent kind in dimension k."""
    if kind == "simultaneous":
        return 1.0 / k
    if kind == "dual":
        return float(k)
    if kind == "multiplicative":
        return 1.0
    raise ValueError(f"unknown exponent kind {kind!r}")


@dataclass(frozen=True)
class ExponentEstimate:
    """Record points of an approximation inequality and the fitted sup.

    Each record is a (size, quality) pair where the error at that size is
    size**(-quality) and beats every smaller size.  The fit is the median
    quality over the last populated dyadic octave of sizes (a plain max is
    hostage to single lucky records near the horizon); ``stable`` says
    whether the previous populated octave agrees to within the stability
    delta.  ``exact_hit`` flags a zero error (rational input), in which case
    the exponent is infinite.
    """

    kind: str
    records: tuple  # (size, quality) pairs, sizes increasing
    exponent: float
    horizon: int
    stable: bool
    exact_hit: bool
    trivial_bound: float

    def __post_init__(self):
        sizes = [s for s, _ in self.records]
        if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
            raise ValueError("record sizes must be strictly increasing")

    def rows(self):
        for size, quality in self.records:
            yield {"kind": self.kind, "size": size, "quality": quality,
                   "exponent": self.exponent, "horizon": self.horizon,
                   "stable": self.stable}


def _octave_fit(records: Sequence) -> tuple:
    """Median quality over the last populated octave, plus a stability flag."""
    top = records[-1][0]
    last = [q for s, q in records if s > top / 2]
    fit = statistics.median(last)
    earlier = [(s, q) for s, q in records if s <= top / 2]
    if not earlier:
        return fit, False
    prev_top = max(s for s, _ in earlier)
    prev = [q for s, q in earlier if s > prev_top / 2]
    return fit, abs(fit - statistics.median(prev)) < STABILITY_DELTA


def omega_from_qualities(kind: str, pairs: Iterable, horizon: int, k: int,
                         exact_hit: bool = False) -> ExponentEstimate:
    """Build an estimate from precomputed (size, quality) record points.

    Pairs are filtered down to strictly improving errors so the record
    invariant holds regardless of how the qualities were produced.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown exponent kind {kind!r}")
    records = []
    best_err = math.inf
    for size, quality in sorted(pairs):
        err = math.exp(-quality * math.log(size)) if size > 1 else 1.0
        if err < best_err:
            best_err = err
            records.append((size, float(quality)))
    if exact_hit:
        return ExponentEstimate(kind, tuple(records), math.inf, horizon,
                                True, True, trivial_exponent_bound(kind, k))
    if not records:
        raise ValueError("no records below the horizon")
    fit, stable = _octave_fit(records)
    return ExponentEstimate(kind, tuple(records), fit, horizon, stable,
                            False, trivial_exponent_bound(kind, k))


def _scan_records(sizes: np.ndarray, errors: np.ndarray):
    """Strict running minima of errors over increasing sizes.

    Returns (records, exact_hit): records are (size, quality) pairs for
    sizes >= 2; exact zero errors terminate the scan.
    """
    records = []
    best = math.inf
    for size, err in zip(sizes.tolist(), errors.tolist()):
        if err == 0.0:
            return records, True
        if err < best:
            best = err
            if size >= 2:
                records.append((int(size), -math.log(err) / math.log(size)))
    return records, False


def omega_fit(kind: str, x: Sequence, Q: int,
              budget: int = ENUM_BUDGET) -> ExponentEstimate:
    """Record-based exponent fit by blind enumeration up to the horizon Q.

    simultaneous: errors max_j ||n x_j|| over integers 2 <= n <= Q
    multiplicative: errors prod_j ||n x_j|| over the same range
    dual: errors ||n . x|| over integer vectors with 0 < ||n||_inf <= Q
    """
    if kind not in KINDS:
        raise ValueError(f"unknown exponent kind {kind!r}")
    if Q < 100:
        raise ValueError("horizon Q must be at least 100")
    xv = np.asarray(x, dtype=float)
    if xv.ndim != 1 or xv.size == 0:
        raise ValueError("x must be a non-empty vector")
    k = xv.size
    if kind == "dual":
        if (2 * Q + 1) ** k > budget:
            raise BudgetExceeded(
                f"dual enumeration needs {(2 * Q + 1) ** k} vectors, "
                f"budget is {budget}")
        axis = np.arange(-Q, Q + 1)
        mesh = np.meshgrid(*([axis] * k), indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        size = np.abs(pts).max(axis=1)
        keep = size > 0
        pts, size = pts[keep], size[keep]
        dot = pts @ xv
        err = np.abs(dot - np.round(dot))
        # one representative per size: the smallest error in that shell
        order = np.lexsort((err, size))
        size, err = size[order], err[order]
        first = np.unique(size, return_index=True)[1]
        size, err = size[first], err[first]
    else:
        n = np.arange(1, Q + 1)
        dist = np.abs(n[:, None] * xv[None, :])
        dist = np.abs(dist - np.round(dist))
        err = dist.max(axis=1) if kind == "simultaneous" else dist.prod(axis=1)
        size = n
    records, exact_hit = _scan_records(size, err)
    return omega_from_qualities(kind, records, Q, k, exact_hit=exact_hit)


def convergent_qualities(alpha, depth: int, dps: Optional[int] = None):
    """(denominator, quality) record points from the continued fraction.

    Errors ||q alpha|| are evaluated at working precision from the exact
    convergents, so the records stay trustworthy far beyond float range.
    """
    dps = dps if dps is not None else max(60, 6 * depth)
    cf = continued_fraction(alpha, depth, dps=dps)
    pairs = []
    exact_hit = cf.exact
    with mp.workdps(dps):
        a = _as_mpf(alpha)
        for p, q in cf.convergents:
            if q < 2:
                continue
            err = abs(q * a - p)
            if err == 0:
                exact_hit = True
                break
            pairs.append((q, float(-mp.log(err) / mp.log(q))))
    return pairs, exact_hit


def liouville_qualities(j_max: int):
    """Records of sum_j 2^(-j!) from its defining series.

    The partial sum up to j is a rational with denominator 2^(j!), and the
    tail is within a factor of two of 2^(-(j+1)!), so the quality at that
    denominator is ((j+1)! - O(1))/j!.  Computed with floating exponents, no
    giant integers needed.
    """
    if j_max < 2:
        raise ValueError("need j_max >= 2")
    with mp.workdps(40):
        pairs = []
        for j in range(2, j_max + 1):
            tail = mp.mpf(0)
            for i in range(j + 1, j_max + 3):
                tail += mp.mpf(2) ** (-math.factorial(i))
            q = mp.mpf(2) ** math.factorial(j)
            pairs.append((int(2) ** math.factorial(j),
                          float(-mp.log(tail) / mp.log(q))))
    return pairs


# ── frequency box enumeration ────────────────────────────────────────────────

def tube_constant(alpha: Sequence) -> float:
    """Width constant for the dual tube in direction alpha."""
    return 2.0 * (1.0 + sum(abs(float(a)) for a in alpha))


def _axis_bound(u: int, d, n: int) -> int:
    return math.floor(Fraction(2 ** u) / (Fraction(d) * n))


def _signed_grid(bounds: Sequence, axis_order: Optional[Sequence] = None
                 ) -> np.ndarray:
    """All integer vectors with |t_j| <= bounds[j], zero vector removed."""
    k = len(bounds)
    order = tuple(axis_order) if axis_order is not None else tuple(range(k))
    if sorted(order) != list(range(k)):
        raise ValueError("axis_order must be a permutation of the axes")
    ranges = [np.arange(-bounds[a], bounds[a] + 1, dtype=np.int64)
              for a in order]
    mesh = np.meshgrid(*ranges, indexing="ij")
    pts = np.empty((mesh[0].size, k), dtype=np.int64)
    for col, m in zip(order, mesh):
        pts[:, col] = m.reshape(-1)
    return pts[np.any(pts != 0, axis=1)]


def count_flat(n: int, alpha: Sequence, eta: float, d: Sequence, u: int,
               v: int, *, constant: Optional[float] = None,
               budget: int = ENUM_BUDGET,
               axis_order: Optional[Sequence] = None,
               split: bool = False):
    """Count nonzero multiples of n in the box-tube intersection.

    The frequencies xi = n t run over the dual box |xi_j| <= 2^u/d_j and the
    tube of half-width C 2^v around the line through alpha, with the
    longitudinal extent capped at C 2^v / eta when eta > 0.  Returns the
    exact count, or the (t_1 = 0, t_1 != 0) stratum pair when ``split``.
    """
    alpha = tuple(float(a) for a in alpha)
    if abs(alpha[0] - 1.0) > 1e-12:
        raise ValueError("alpha must be normalized with first entry 1")
    if len(d) != len(alpha):
        raise ValueError("scales and direction must share a dimension")
    if n < 1 or u < 0 or v < 0 or eta < 0:
        raise ValueError("indices must be nonnegative and n positive")
    bounds = [_axis_bound(u, dj, n) for dj in d]
    candidates = math.prod(2 * b + 1 for b in bounds)
    if candidates > budget:
        raise BudgetExceeded(
            f"flat tube enumeration needs {candidates} candidates, "
            f"budget is {budget}")
    c = tube_constant(alpha) if constant is None else float(constant)
    t = _signed_grid(bounds, axis_order)
    if t.size == 0:
        return (0, 0) if split else 0
    half = c * 2.0 ** v / n
    ok = np.ones(len(t), dtype=bool)
    for j in range(1, len(alpha)):
        ok &= np.abs(t[:, 0] * alpha[j] - t[:, j]) <= half
    if eta > 0:
        ok &= np.abs(t[:, 0]) <= half / eta
    if not split:
        return int(np.count_nonzero(ok))
    zero_stratum = int(np.count_nonzero(ok & (t[:, 0] == 0)))
    return zero_stratum, int(np.count_nonzero(ok)) - zero_stratum


@dataclass(frozen=True)
class CountParams:
    """Dyadic indices and scale rows for a two-modulus frequency count.

    The derived per-axis choice bounds r_j = 2^(u+2-m)/d_j + 1 cap how many
    values t_j can take for any modulus in the block, and f is the
    normalizing density 2^(-k(m+m'))/prod(d d') shared by all envelopes.
    ``y`` carries the shift metadata of the source system; counts do not
    depend on it (only coefficient phases do).
    """

    m: int
    m_prime: int
    u: int
    u_prime: int
    v: int
    d_row: tuple
    dp_row: tuple
    y: tuple = ()
    tau: Optional[float] = None

    def __post_init__(self):
        for name in ("m", "m_prime", "u", "u_prime", "v"):
            if getattr(self, name) < 1:
                raise ValueError(f"index {name} must be at least 1")
        if len(self.d_row) != len(self.dp_row):
            raise ValueError("scale rows must share a dimension")
        for dj in (*self.d_row, *self.dp_row):
            if not 0 < Fraction(dj) <= 1:
                raise ValueError("scales must lie in (0, 1]")

    @property
    def k(self) -> int:
        return len(self.d_row)

    @property
    def r_values(self) -> tuple:
        return tuple(2.0 ** (self.u + 2 - self.m) / float(dj) + 1.0
                     for dj in self.d_row)

    @property
    def rp_values(self) -> tuple:
        return tuple(2.0 ** (self.u_prime + 2 - self.m_prime) / float(dj) + 1.0
                     for dj in self.dp_row)

    def f(self) -> float:
        prod = Fraction(1)
        for dj in (*self.d_row, *self.dp_row):
            prod *= Fraction(dj)
        return float(Fraction(1, 2 ** (self.k * (self.m + self.m_prime)))
                     / prod)

    @classmethod
    def from_system(cls, system: AdmissibleSystem, m: int, m_prime: int,
                    u: int, u_prime: int, v: int, i: int = 0,
                    i_prime: int = 0) -> "CountParams":
        rows, rows_p = system.rows(m), system.rows(m_prime)
        if not rows or not rows_p:
            raise ValueError("both blocks must carry scale rows")
        return cls(m, m_prime, u, u_prime, v, rows[i][0], rows_p[i_prime][0],
                   y=system.y, tau=system.tau)

    def moduli(self) -> tuple:
        return (range(2 ** (self.m - 1), 2 ** self.m),
                range(2 ** (self.m_prime - 1), 2 ** self.m_prime))


@dataclass(frozen=True)
class PairCounts:
    parallel: int
    skew: int

    @property
    def total(self) -> int:
        return self.parallel + self.skew

    def row(self) -> dict:
        return {"n1": self.parallel, "n2": self.skew, "total": self.total}


def _pair_budget(params: CountParams, n_range, np_range) -> int:
    total = 0
    for n in n_range:
        size_t = math.prod(2 * _axis_bound(params.u, dj, n) + 1
                           for dj in params.d_row)
        for n_p in np_range:
            size_tp = math.prod(2 * _axis_bound(params.u_prime, dj, n_p) + 1
                                for dj in params.dp_row)
            total += size_t * size_tp
    return total


def _pair_scan(params: CountParams, n_range, np_range, alpha, constant,
               axis_order, swap_roles, classify: bool):
    k = params.k
    if alpha is not None:
        alpha = tuple(float(a) for a in alpha)
        if len(alpha) != k or abs(alpha[0] - 1.0) > 1e-12:
            raise ValueError("alpha must be normalized with first entry 1")
        c = tube_constant(alpha) if constant is None else float(constant)
    cap = 2 ** params.v
    minor_pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
    n1 = n2 = 0
    for n in n_range:
        if n < 1:
            raise ValueError("moduli must be positive")
        t = _signed_grid([_axis_bound(params.u, dj, n)
                          for dj in params.d_row], axis_order)
        if t.size == 0:
            continue
        for n_p in np_range:
            if n_p < 1:
                raise ValueError("moduli must be positive")
            tp = _signed_grid([_axis_bound(params.u_prime, dj, n_p)
                               for dj in params.dp_row], axis_order)
            if tp.size == 0:
                continue
            if swap_roles:
                left, right = tp, t
                n_left, n_right = n_p, n
            else:
                left, right = t, tp
                n_left, n_right = n, n_p
            chunk = max(1, _PAIR_CHUNK // len(right))
            for lo in range(0, len(left), chunk):
                block = left[lo:lo + chunk]
                x = n_left * block[:, None, :] + n_right * right[None, :, :]
                ok = np.any(x != 0, axis=2)
                if alpha is None:
                    ok &= np.abs(x).max(axis=2) <= cap
                else:
                    width = c * cap
                    for j in range(1, k):
                        ok &= np.abs(x[:, :, j]
                                     - alpha[j] * x[:, :, 0]) <= width
                if not classify:
                    n2 += int(np.count_nonzero(ok))
                    continue
                par = np.ones(ok.shape, dtype=bool)
                for a, b in minor_pairs:
                    par &= (block[:, None, a] * right[None, :, b]
                            == block[:, None, b] * right[None, :, a])
                n1 += int(np.count_nonzero(ok & par))
                n2 += int(np.count_nonzero(ok & ~par))
    return n1, n2


def count_pairs(params: CountParams, n_range: Iterable, np_range: Iterable,
                *, alpha: Optional[Sequence] = None,
                constant: Optional[float] = None, budget: int = ENUM_BUDGET,
                axis_order: Optional[Sequence] = None,
                swap_roles: bool = False) -> PairCounts:
    """Exact (parallel, non-parallel) solution counts for x = n t + n' t'.

    The frequency pair runs over the dual boxes |t_j n| <= 2^u/d_j and
    |t'_j n'| <= 2^u'/d'_j with t, t', x all nonzero.  Without ``alpha`` the
    sum is confined to the cube |x_j| <= 2^v; with it, to the tube
    |x_j - alpha_j x_1| <= C 2^v.  Parallel means every 2x2 minor of (t, t')
    vanishes, tested exactly on integers.
    """
    n_range, np_range = list(n_range), list(np_range)
    need = _pair_budget(params, n_range, np_range)
    if need > budget:
        raise BudgetExceeded(
            f"pair enumeration needs {need} candidates, budget is {budget}")
    n1, n2 = _pair_scan(params, n_range, np_range, alpha, constant,
                        axis_order, swap_roles, classify=True)
    return PairCounts(n1, n2)


def count_unsplit(params: CountParams, n_range: Iterable, np_range: Iterable,
                  *, alpha: Optional[Sequence] = None,
                  constant: Optional[float] = None, budget: int = ENUM_BUDGET,
                  axis_order: Optional[Sequence] = None,
                  swap_roles: bool = False) -> int:
    """Total solution count without the parallel split (cross-check path)."""
    n_range, np_range = list(n_range), list(np_range)
    need = _pair_budget(params, n_range, np_range)
    if need > budget:
        raise BudgetExceeded(
            f"pair enumeration needs {need} candidates, budget is {budget}")
    _, total = _pair_scan(params, n_range, np_range, alpha, constant,
                          axis_order, swap_roles, classify=False)
    return total


# ── divisor-bound envelopes ──────────────────────────────────────────────────

def _log_factor(params: CountParams) -> float:
    # the epsilon powers in the divisor bounds are realized as (log scale)^k
    bits = params.m + params.m_prime + params.u + params.u_prime
    return max(1.0, float(bits)) ** params.k


def trivial_envelope(params: CountParams) -> float:
    """Volume bound from the variable ranges alone."""
    k = params.k
    return (2.0 ** (k * (params.u + params.u_prime + params.v)
                    + params.m + params.m_prime) * params.f())


def n2_envelope(params: CountParams, tau: Optional[float] = None) -> float:
    """Divisor-bound envelope for the non-parallel count, cube constraint."""
    tau = params.tau if tau is None else tau
    if tau is None:
        raise ValueError("an explicit tau is required")
    k = params.k
    exponent = (k * (params.u + params.u_prime) + 2 * params.v
                - (1 - k * tau) * (params.m + params.m_prime) / (2 * k))
    return _log_factor(params) * 2.0 ** exponent * params.f()


def n2_envelope_flat(params: CountParams, omega_dual: float) -> float:
    """Envelope for the non-parallel count under the tube constraint.

    ``omega_dual`` is the dual exponent of the last k-1 direction entries;
    the leading three axes pay the full choice counts and the singular-value
    factor, later axes only square roots.
    """
    k = params.k
    if k < 3:
        raise ValueError("the tube pair bound needs k >= 3")
    r, rp = params.r_values, params.rp_values
    lead = min(3, k)
    cross = max(r[i] * rp[j] for i in range(lead) for j in range(lead))
    body = math.prod(r[j] * rp[j] for j in range(lead))
    value = (2.0 ** ((k - 1) * params.v) * cross ** omega_dual * body
             * max(max(r), max(rp)))
    if k >= 4:
        value *= min(r[3], rp[3])
        value *= math.prod(math.sqrt(r[j] * rp[j]) for j in range(4, k))
    return _log_factor(params) * value


# ── gcd lattice ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GcdLattice:
    spacing: Fraction
    multiplicity: int


def gcd_lattice(n: int, n_prime: int, k: int = 1) -> GcdLattice:
    """Difference lattice of two periodic center grids.

    The points a/n - a'/n' mod 1 form the lattice with spacing
    gcd(n, n')/(n n') per axis, every point hit gcd(n, n')^k times.
    """
    if n < 1 or n_prime < 1:
        raise ValueError("moduli must be positive")
    g = math.gcd(n, n_prime)
    return GcdLattice(Fraction(g, n * n_prime), g ** k)


def gcd_lattice_enumerate(n: int, n_prime: int) -> GcdLattice:
    """One-axis brute force: bucket all a/n - a'/n' residues exactly.

    Works over integers mod n n'; the k-axis statement is the k-fold
    product of this one, so multiplicity exponentiates.
    """
    nn = n * n_prime
    counts = np.zeros(nn, dtype=np.int64)
    a = np.arange(n) * n_prime
    ap = np.arange(n_prime) * n
    counts_idx = (a[:, None] - ap[None, :]) % nn
    np.add.at(counts, counts_idx.reshape(-1), 1)
    hit = np.nonzero(counts)[0]
    gaps = np.diff(hit)
    if hit[0] != 0 or (gaps.size and not np.all(gaps == gaps[0])):
        raise AssertionError("difference residues do not form a lattice")
    mult = np.unique(counts[hit])
    if mult.size != 1:
        raise AssertionError("lattice points hit unevenly")
    spacing = Fraction(int(gaps[0]) if gaps.size else 1, nn)
    return GcdLattice(spacing, int(mult[0]))


# ── gcd sums of the set-level error term ─────────────────────────────────────

def set_lambda(system: AdmissibleSystem, n: int) -> Fraction:
    """Exact measure of the union of decomposition boxes at modulus n."""
    return sum((box.volume() for box in system.boxes_for(n)), Fraction(0))


@dataclass(frozen=True)
class GcdSumReport:
    """Exact gcd-weighted error sums against the plain mass sum.

    s2 collects gcd(n, n')^k weights, s3 adds the skew denominator factor;
    both are reported relative to the total mass, and those ratios are the
    quantities that stay bounded for k >= 3.
    """

    N: int
    k: int
    lambda_sum: Fraction
    s2: Fraction
    s3: float

    @property
    def ratio2(self) -> float:
        return float(self.s2 / self.lambda_sum) if self.lambda_sum else 0.0

    @property
    def ratio3(self) -> float:
        return self.s3 / float(self.lambda_sum) if self.lambda_sum else 0.0

    def row(self) -> dict:
        return {"N": self.N, "k": self.k,
                "lambda_sum": float(self.lambda_sum), "s2": float(self.s2),
                "s3": self.s3, "ratio2": self.ratio2, "ratio3": self.ratio3}


def _phi_table(N: int) -> np.ndarray:
    phi = np.arange(N + 1, dtype=np.int64)
    for p in range(2, N + 1):
        if phi[p] == p:  # p prime: untouched so far
            phi[p::p] -= phi[p::p] // p
    return phi


def gcd_sum_check(system: AdmissibleSystem, N: int) -> GcdSumReport:
    """Exact evaluation of the gcd error sums up to N.

    s2 = sum_{n' <= n <= N} lambda(A_n)/n^k gcd(n,n')^k is computed exactly
    via the divisor decomposition sum_{r|n} r^k phi(n/r); s3 carries the
    irrational power (n')^((tau-1-1/k)(k-1)) and is accumulated in floats
    with compensated summation.  Boundedness of the ratios is a k >= 3
    phenomenon; smaller k is allowed for observation runs.
    """
    if N < 1:
        raise ValueError("N must be positive")
    k, tau = system.k, system.tau
    lam = {n: set_lambda(system, n) for n in range(1, N + 1)}
    phi = _phi_table(N)
    inner2 = np.zeros(N + 1, dtype=object)
    for r in range(1, N + 1):
        rk = r ** k
        for n in range(r, N + 1, r):
            inner2[n] += rk * int(phi[n // r])
    lam_sum = sum(lam.values(), Fraction(0))
    s2 = sum((lam[n] * Fraction(int(inner2[n]), n ** k)
              for n in range(1, N + 1) if lam[n]), Fraction(0))
    skew_exp = (tau - 1.0 - 1.0 / k) * (k - 1)
    parts = []
    for n in range(1, N + 1):
        if not lam[n]:
            continue
        n_p = np.arange(1, n + 1, dtype=np.float64)
        g = np.gcd(np.arange(1, n + 1, dtype=np.int64), n).astype(np.float64)
        inner = (g ** k * (n * n_p / g) ** (k - 1) * n_p ** skew_exp).sum()
        parts.append(float(lam[n]) / n ** k * inner)
    return GcdSumReport(N, k, lam_sum, s2, math.fsum(parts))

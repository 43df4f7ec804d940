"""First and second moments of smoothed block sums under a measure.

The block sum S_N(x) = sum_{n <= N} f_n(x) carries all the moment
diagnostics: E_N(mu) is the mean of S_N under mu, V_N(mu) the mean of
(S_N - E_N(lambda))^2, and the pair sum the mean of S_N^2.  Computing the
three from one fixed sample set makes the second-moment expansion

    pair = V + 2 E(mu) E(lambda) - E(lambda)^2

an exact algebraic identity of empirical sums rather than an asymptotic
statement, so it is checked at full floating-point precision.  On top of
that sit the transference reports: per-modulus ratios mu(f_n)/lambda(f_n)
against the curvature-driven error envelope, expectation ratios and
variance excesses along dyadic N, and the divergence Borel-Cantelli
lower bound assembled from partial mass ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .boxes import block_of
from .measures import LebesgueCube, MonteCarlo, sample
from .windows import An_star_coefficient, SmoothedSystem

__all__ = [
    "default_sample_count",
    "MomentReport",
    "moment_report",
    "expectation",
    "variance",
    "pair_sum",
    "second_moment_identity",
    "lambda_variance_fourier",
    "dbc_lower_bound",
    "TransferenceVerdict",
    "transference_report",
]


def default_sample_count(k: int) -> int:
    return 100_000 if k <= 3 else 10_000


def _horizon(s: SmoothedSystem) -> int:
    return 2 ** s.base.m_max - 1


def _moduli_upto(s: SmoothedSystem, n_hi: int, n_lo: int = 1):
    if n_hi > _horizon(s):
        raise ValueError(f"N={n_hi} beyond the system horizon {_horizon(s)}")
    lo = max(n_lo, s.base.moduli().start)
    return range(lo, min(n_hi, s.base.moduli().stop - 1) + 1)


def _mean_se(vals: np.ndarray) -> tuple:
    m = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.inf
    return m, se


# ── moment reports ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MomentReport:
    """All first and second moments of S_N from one shared sample set per
    measure: the mu side from the measure's sampler, the lambda side from
    an independent uniform stream, plus the exact E_N(lambda)."""

    N: int
    e_lambda: float
    e_mu: float
    e_mu_se: float
    v_mu: float
    v_mu_se: float
    pair_mu: float
    pair_mu_se: float
    e_lambda_emp: float
    e_lambda_emp_se: float
    v_lambda: float
    v_lambda_se: float
    pair_lambda: float
    pair_lambda_se: float
    count: int
    seed: int
    measure_name: str
    shared: bool = True

    def row(self) -> dict:
        return {
            "N": self.N, "e_lambda": self.e_lambda,
            "e_mu": self.e_mu, "e_mu_se": self.e_mu_se,
            "v_mu": self.v_mu, "v_mu_se": self.v_mu_se,
            "pair_mu": self.pair_mu, "pair_mu_se": self.pair_mu_se,
            "v_lambda": self.v_lambda, "v_lambda_se": self.v_lambda_se,
            "pair_lambda": self.pair_lambda, "pair_lambda_se": self.pair_lambda_se,
            "count": self.count, "seed": self.seed, "measure": self.measure_name,
        }


def _block_total(s: SmoothedSystem, N: int, pts: np.ndarray) -> np.ndarray:
    total = np.zeros(len(pts))
    for n in _moduli_upto(s, N):
        total += s.eval(n, pts)
    return total


def exact_e_lambda(s: SmoothedSystem, N: int) -> float:
    """E_N(lambda) summed in closed form: n^k w_m per modulus."""
    return math.fsum(s.lambda_f(n) for n in _moduli_upto(s, N))


def moment_report(s: SmoothedSystem, measure, N: int,
                  sampler: MonteCarlo) -> MomentReport:
    """Evaluate every moment of S_N on one sample set per measure side.

    The lambda side always comes from a uniform stream derived from the
    same seed, so reports are reproducible as a unit.
    """
    rng_mu = np.random.default_rng([sampler.seed, 0x6D75])
    rng_la = np.random.default_rng([sampler.seed, 0x6C61])
    cube = LebesgueCube(s.base.k)
    pts_la = sample(cube, rng_la, sampler.count)
    if measure is None:
        pts_mu, name = pts_la, "lebesgue-shared"
    else:
        pts_mu, name = sample(measure, rng_mu, sampler.count), getattr(measure, "name", "mu")
    s_mu = _block_total(s, N, pts_mu)
    s_la = s_mu if measure is None else _block_total(s, N, pts_la)
    L = exact_e_lambda(s, N)
    e_mu, e_mu_se = _mean_se(s_mu)
    v_mu, v_mu_se = _mean_se((s_mu - L) ** 2)
    p_mu, p_mu_se = _mean_se(s_mu ** 2)
    e_la, e_la_se = _mean_se(s_la)
    v_la, v_la_se = _mean_se((s_la - L) ** 2)
    p_la, p_la_se = _mean_se(s_la ** 2)
    return MomentReport(N, L, e_mu, e_mu_se, v_mu, v_mu_se, p_mu, p_mu_se,
                        e_la, e_la_se, v_la, v_la_se, p_la, p_la_se,
                        sampler.count, sampler.seed, name)


def expectation(s: SmoothedSystem, measure, N: int,
                sampler: Optional[MonteCarlo] = None) -> tuple:
    """E_N with standard error; exact (se 0) when the measure is Lebesgue."""
    if measure is None or isinstance(measure, LebesgueCube):
        return exact_e_lambda(s, N), 0.0
    if sampler is None:
        raise ValueError("a sampler is required for non-Lebesgue measures")
    rep = moment_report(s, measure, N, sampler)
    return rep.e_mu, rep.e_mu_se


def variance(s: SmoothedSystem, measure, N: int, sampler: MonteCarlo) -> tuple:
    if N == 0 or not len(_moduli_upto(s, max(N, 1))):
        return 0.0, 0.0
    rep = moment_report(s, measure, N, sampler)
    return rep.v_mu, rep.v_mu_se


def pair_sum(s: SmoothedSystem, measure, N: int, sampler: MonteCarlo) -> tuple:
    rep = moment_report(s, measure, N, sampler)
    return rep.pair_mu, rep.pair_mu_se


def second_moment_identity(report: MomentReport) -> float:
    """Worst relative residual of the pair-sum expansion on both sides.

    pair = V - E(lambda)^2 + 2 E(mu) E(lambda) holds exactly for sums over
    one sample set; anything beyond rounding means mixed sample sets.
    """
    if not report.shared:
        raise ValueError("moments from mixed sample sets cannot be reconciled")
    worst = 0.0
    for pair, v, e in ((report.pair_mu, report.v_mu, report.e_mu),
                       (report.pair_lambda, report.v_lambda, report.e_lambda_emp)):
        rhs = v - report.e_lambda ** 2 + 2.0 * e * report.e_lambda
        worst = max(worst, abs(pair - rhs) / max(1.0, abs(pair)))
    return worst


def lambda_variance_fourier(s: SmoothedSystem, N: int, cutoff: int) -> float:
    """Truncated dual-side V_N(lambda): sum over nonzero frequencies of
    |sum_n f_n^(xi)|^2, each block contributing on its own lattice."""
    acc: dict = {}
    for n in _moduli_upto(s, N):
        windows = s.windows_for(n)
        if not windows:
            continue
        grids = [np.arange(-cutoff, cutoff + 1)] * s.base.k
        mesh = np.meshgrid(*grids, indexing="ij")
        ts = np.stack([m.ravel() for m in mesh], axis=-1)
        for t in ts:
            if not t.any():
                continue
            xi = tuple(int(v) for v in n * t)
            c = sum(An_star_coefficient(w, np.array(xi)) for w in windows)
            if c != 0:
                acc[xi] = acc.get(xi, 0j) + c
    return math.fsum(abs(v) ** 2 for v in acc.values())


# ── divergence Borel-Cantelli lower bound ────────────────────────────────────

def dbc_lower_bound(mu_series: Mapping[int, float], c_constant: float,
                    x_cut: int, y_cut: int) -> float:
    """(1/C) (sum_{X < n <= Y} mu(f_n) / sum_{n <= Y} mu(f_n))^2.

    C must dominate pair sums over squared means, hence C >= 1 and the
    bound never exceeds one; the tail ratio shrinks as X grows at fixed Y.
    """
    if c_constant < 1.0:
        raise ValueError("the pair-sum constant is at least 1 (Cauchy-Schwarz)")
    total = math.fsum(v for n, v in mu_series.items() if n <= y_cut)
    if total <= 0.0:
        raise ZeroDivisionError("no mass up to Y: the ratio is undefined")
    tail = math.fsum(v for n, v in mu_series.items() if x_cut < n <= y_cut)
    return (tail / total) ** 2 / c_constant


# ── transference reports ─────────────────────────────────────────────────────

@dataclass(frozen=True)
class TransferenceVerdict:
    """Per-modulus first-moment ratios with their error envelope, and
    dyadic-N expectation ratios and variance excesses."""

    measure_name: str
    sigma: Optional[float]
    ratio_ns: tuple
    ratios: tuple
    ratio_ses: tuple
    envelopes: tuple
    fitted_c: Optional[float]
    checkpoints: tuple
    etp_ratio: tuple
    vtp_excess: tuple
    count: int
    seed: int

    def ratio_rows(self):
        for n, r, se, env in zip(self.ratio_ns, self.ratios, self.ratio_ses,
                                 self.envelopes):
            yield {"n": n, "ratio": r, "se": se,
                   "envelope": "" if env is None else env,
                   "measure": self.measure_name}

    def dyadic_rows(self):
        for N, er, vx in zip(self.checkpoints, self.etp_ratio, self.vtp_excess):
            yield {"N": N, "etp_ratio": er, "vtp_excess": vx,
                   "measure": self.measure_name}


def _envelope(s: SmoothedSystem, n: int, sigma: float) -> float:
    m = block_of(n)
    dprod = float(s.base.scale_product(m))
    return dprod ** (-(1.0 - sigma / s.base.k)) / float(n) ** s.base.k


def transference_report(s: SmoothedSystem, measure, *, n_lo: int, n_hi: int,
                        sampler: MonteCarlo, sigma: Optional[float] = None,
                        checkpoints: Sequence[int] = ()) -> TransferenceVerdict:
    """Scan mu(f_n)/lambda(f_n) over a modulus window on one sample set.

    With a decay exponent sigma the per-modulus deviation is compared to
    (d_1...d_k)^{-(1-sigma/k)} / n^k and the single constant making every
    modulus obey the envelope is reported.  Checkpoints (powers of two)
    collect E_N(mu)/E_N(lambda) and the variance excess on the way.
    """
    for N in checkpoints:
        if N & (N - 1):
            raise ValueError("checkpoints must be powers of two")
    rng_mu = np.random.default_rng([sampler.seed, 0x6D75])
    rng_la = np.random.default_rng([sampler.seed, 0x6C61])
    cube = LebesgueCube(s.base.k)
    pts_la = sample(cube, rng_la, sampler.count)
    exact = measure is None
    pts_mu = pts_la if exact else sample(measure, rng_mu, sampler.count)
    name = "lebesgue-shared" if exact else getattr(measure, "name", "mu")

    marks = sorted(set(int(N) for N in checkpoints))
    ns, ratios, ses, envs = [], [], [], []
    run_mu = np.zeros(sampler.count)
    run_la = np.zeros(sampler.count)
    run_L = 0.0
    cps, etp, vtp = [], [], []
    top = max([n_hi] + marks)
    for n in _moduli_upto(s, top):
        lam = s.lambda_f(n)
        vals_mu = s.eval(n, pts_mu)
        vals_la = vals_mu if exact else s.eval(n, pts_la)
        run_mu += vals_mu
        run_la += vals_la
        run_L += lam
        if n_lo <= n <= n_hi and lam > 0:
            ns.append(n)
            if exact:
                ratios.append(1.0)
                ses.append(0.0)
            else:
                m, se = _mean_se(vals_mu)
                ratios.append(m / lam)
                ses.append(se / lam)
            envs.append(None if sigma is None else _envelope(s, n, sigma))
        if n in marks:
            cps.append(n)
            if exact:
                etp.append(1.0)
                vtp.append(0.0)
            else:
                e_mu = float(run_mu.mean())
                v_mu = float(((run_mu - run_L) ** 2).mean())
                v_la = float(((run_la - run_L) ** 2).mean())
                etp.append(e_mu / run_L if run_L > 0 else math.nan)
                vtp.append((v_mu - v_la) / e_mu ** 2 if e_mu > 0 else math.nan)
    fitted = None
    if sigma is not None and ns:
        fitted = max(abs(r - 1.0) / env for r, env in zip(ratios, envs))
    return TransferenceVerdict(name, sigma, tuple(ns), tuple(ratios), tuple(ses),
                               tuple(envs), fitted, tuple(cps), tuple(etp),
                               tuple(vtp), sampler.count, sampler.seed)

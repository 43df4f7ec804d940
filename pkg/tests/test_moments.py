"""Moment algebra, transference scans, and the divergence lower bound.

Oracles:
  * closed-form expectation sums for single-block systems
  * the truncated dual-side variance sum against sampled variance
  * exact set-level intersection volumes bounding functional pair sums
  * algebraic second-moment identity at floating-point precision
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from multbox.boxes import admissible_system
from multbox.intersections import intersection_volume
from multbox.measures import (
    HyperplaneSpec,
    LebesgueCube,
    MonteCarlo,
    sphere_cap_patch,
)
from multbox.moments import (
    MomentReport,
    dbc_lower_bound,
    default_sample_count,
    exact_e_lambda,
    expectation,
    lambda_variance_fourier,
    moment_report,
    pair_sum,
    second_moment_identity,
    transference_report,
    variance,
)
from multbox.psi import PowerLaw
from multbox.windows import An_star_coefficient, smoothed_system

SEED = 40961


def small_system(k=2, m_max=5, m_min=1):
    return smoothed_system(
        admissible_system(PowerLaw(0.3, 1.0), 0.2, m_max=m_max, k=k, m_min=m_min))


SYS2 = small_system()
SYS3 = small_system(k=3, m_max=5)


# ── expectation ──────────────────────────────────────────────────────────────

def test_exact_expectation_is_lambda_sum():
    total = math.fsum(SYS2.lambda_f(n) for n in range(1, 21))
    val, se = expectation(SYS2, None, 20)
    assert val == pytest.approx(total, rel=1e-14)
    assert se == 0.0


def test_expectation_matches_fourier_zero_mode():
    spatial = exact_e_lambda(SYS2, 16)
    dual = 0.0
    for n in range(1, 17):
        for w in SYS2.windows_for(n):
            dual += An_star_coefficient(w, np.zeros(2, dtype=int)).real
    assert abs(spatial - dual) < 1e-10 * max(1.0, spatial)


def test_single_block_closed_form():
    s = small_system(m_max=4, m_min=4)
    # lambda(f_n) = n^k w_m across one block, so E_N is w_m times a power sum
    w_m = s.weight(4)
    for N in (9, 12, 15):
        expected = w_m * sum(n ** 2 for n in range(8, N + 1))
        assert exact_e_lambda(s, N) == pytest.approx(expected, rel=1e-12)
    assert exact_e_lambda(s, 7) == 0.0


def test_expectation_horizon_enforced():
    with pytest.raises(ValueError, match="horizon"):
        expectation(SYS2, None, 64)


# ── moment reports and the identity ──────────────────────────────────────────

def test_reports_deterministic():
    a = moment_report(SYS2, sphere_cap_patch(2), 12, MonteCarlo(20_000, SEED))
    b = moment_report(SYS2, sphere_cap_patch(2), 12, MonteCarlo(20_000, SEED))
    assert a == b


def test_identity_residual_tiny_across_measures():
    measures = [None, LebesgueCube(2), sphere_cap_patch(2),
                HyperplaneSpec(alpha=(1.0, 0.5), box=(0.4,), radii=(0.05,),
                               eta=1e-2)]
    for measure in measures:
        for N in (5, 17, 30):
            rep = moment_report(SYS2, measure, N, MonteCarlo(8_000, SEED + N))
            assert second_moment_identity(rep) <= 1e-10


def test_identity_rejects_mixed_samples():
    rep = moment_report(SYS2, None, 8, MonteCarlo(2_000, SEED))
    import dataclasses
    broken = dataclasses.replace(rep, shared=False)
    with pytest.raises(ValueError, match="sample sets"):
        second_moment_identity(broken)


def test_variance_nonnegative_and_zero_horizonless():
    v, se = variance(SYS2, LebesgueCube(2), 25, MonteCarlo(20_000, SEED))
    assert v >= 0.0
    v0, se0 = variance(SYS2, LebesgueCube(2), 0, MonteCarlo(1_000, SEED))
    assert (v0, se0) == (0.0, 0.0)


def test_pair_sum_single_modulus_bound():
    s = small_system(m_max=1, m_min=1)
    # 0 <= f_1 <= 1 forces mu(f_1^2) <= mu(f_1)
    p, p_se = pair_sum(s, LebesgueCube(2), 1, MonteCarlo(50_000, SEED))
    e, e_se = expectation(s, LebesgueCube(2), 1, MonteCarlo(50_000, SEED))
    assert p <= e + 4 * (p_se + e_se)


def test_sampled_lambda_variance_matches_fourier():
    vf = lambda_variance_fourier(SYS2, 12, 24)
    rep = moment_report(SYS2, LebesgueCube(2), 12, MonteCarlo(300_000, SEED))
    assert abs(rep.v_lambda - vf) < 4 * rep.v_lambda_se + 1e-3


def test_lambda_pair_sum_below_exact_set_volumes():
    N = 8
    rep = moment_report(SYS2, LebesgueCube(2), N, MonteCarlo(200_000, SEED))
    exact = Fraction(0)
    boxes = {n: SYS2.base.boxes_for(n) for n in range(1, N + 1)}
    zero = (Fraction(0), Fraction(0))
    for m in range(1, N + 1):
        for n in range(1, N + 1):
            if boxes[m] and boxes[n]:
                exact += intersection_volume(boxes[m], boxes[n], zero)
    # windows sit below the indicators of their disjoint unions
    assert rep.pair_lambda <= float(exact) + 4 * rep.pair_lambda_se


def test_default_sample_counts():
    assert default_sample_count(2) == 100_000
    assert default_sample_count(4) == 10_000


# ── divergence Borel-Cantelli bound ──────────────────────────────────────────

def test_dbc_full_window_is_inverse_constant():
    series = {n: SYS2.lambda_f(n) for n in SYS2.base.moduli()}
    assert dbc_lower_bound(series, 2.5, 0, 31) == pytest.approx(1 / 2.5, rel=1e-12)


def test_dbc_monotone_in_tail_cut_and_bounded():
    series = {n: SYS2.lambda_f(n) for n in SYS2.base.moduli()}
    prev = math.inf
    for x_cut in (0, 2, 6, 14):
        val = dbc_lower_bound(series, 1.2, x_cut, 31)
        assert 0.0 <= val <= 1.0
        assert val <= prev + 1e-15
        prev = val


def test_dbc_approaches_inverse_constant_on_divergent_series():
    big = smoothed_system(
        admissible_system(PowerLaw(0.3, 1.0), 0.2, m_max=8, k=2))
    series = {n: big.lambda_f(n) for n in big.base.moduli()}
    c = 1.8
    vals = [dbc_lower_bound(series, c, 2, y) for y in (8, 32, 128, 255)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.8 / c


def test_dbc_error_cases():
    with pytest.raises(ValueError, match="at least 1"):
        dbc_lower_bound({2: 1.0}, 0.5, 0, 4)
    with pytest.raises(ZeroDivisionError):
        dbc_lower_bound({9: 1.0}, 2.0, 0, 4)


# ── transference reports ─────────────────────────────────────────────────────

def test_lebesgue_transference_is_exactly_flat():
    rep = transference_report(SYS2, None, n_lo=4, n_hi=24,
                              sampler=MonteCarlo(5_000, SEED),
                              checkpoints=(8, 16))
    assert all(r == 1.0 for r in rep.ratios)
    assert all(er == 1.0 for er in rep.etp_ratio)
    assert all(vx == 0.0 for vx in rep.vtp_excess)


def test_transference_checkpoints_must_be_dyadic():
    with pytest.raises(ValueError, match="powers of two"):
        transference_report(SYS2, None, n_lo=4, n_hi=8,
                            sampler=MonteCarlo(1_000, SEED), checkpoints=(12,))


def test_curved_envelope_holds_with_one_constant():
    s = small_system(k=3, m_max=6, m_min=4)
    rep = transference_report(s, sphere_cap_patch(3), n_lo=8, n_hi=60,
                              sampler=MonteCarlo(60_000, SEED), sigma=1.0,
                              checkpoints=(16, 32))
    assert rep.fitted_c is not None and rep.fitted_c < 10.0
    for r, env in zip(rep.ratios, rep.envelopes):
        assert abs(r - 1.0) <= rep.fitted_c * env + 1e-12


def test_flat_hyperplane_ratio_trend():
    s = small_system(k=3, m_max=7, m_min=4)
    hp = HyperplaneSpec(alpha=(1.0, math.sqrt(2.0), math.sqrt(3.0)),
                        box=(0.4, 0.4), radii=(0.05, 0.05), eta=1e-3)
    rep = transference_report(s, hp, n_lo=8, n_hi=120,
                              sampler=MonteCarlo(60_000, SEED))
    ns = np.array(rep.ratio_ns)
    devs = np.abs(np.array(rep.ratios) - 1.0)
    early = np.median(devs[ns <= 16])
    late = np.median(devs[ns >= 64])
    assert late < early


def test_verdict_rows_schema():
    rep = transference_report(SYS2, sphere_cap_patch(2), n_lo=4, n_hi=16,
                              sampler=MonteCarlo(4_000, SEED), sigma=0.5,
                              checkpoints=(8,))
    rrows = list(rep.ratio_rows())
    assert set(rrows[0]) == {"n", "ratio", "se", "envelope", "measure"}
    drows = list(rep.dyadic_rows())
    assert drows[0]["N"] == 8
    assert set(drows[0]) == {"N", "etp_ratio", "vtp_excess", "measure"}

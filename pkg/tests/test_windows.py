"""Smoothed periodic windows: exact coefficient support, decay, mass identities.

Oracles:
  * a midpoint Riemann sum for 1-D Fourier coefficients (spectral accuracy
    for smooth periodic integrands), frozen against the closed product form
  * a 2-D midpoint mean over one period cell for spatial masses
"""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multbox.boxes import BoxSpec, admissible_system, union_mask
from multbox.bumps import BumpFunction
from multbox.psi import PowerLaw
from multbox.windows import (
    An_star_coefficient,
    SmoothedSystem,
    WindowProduct,
    an_star_spatial,
    f_n_eval,
    lambda_An_star,
    lambda_An_star_sq,
    normalized_coefficient,
    parseval_check,
    shell_decay_scan,
    smoothed_system,
    window_transform,
)

SEED = 31419

INNER = BumpFunction("inner")
ANNULAR = BumpFunction("annular")

W_1D = WindowProduct(BoxSpec(2, (Fraction(1, 8),), (False,)), (INNER,))
W_MIX = WindowProduct(
    BoxSpec(4, (Fraction(1, 16), Fraction(1, 32)), (False, True)),
    (INNER, ANNULAR))
W_SQ = WindowProduct(
    BoxSpec(2, (Fraction(1, 4), Fraction(1, 4)), (False, False)),
    (INNER, INNER))
W_FINE = WindowProduct(BoxSpec(8, (Fraction(1, 64),), (False,)), (INNER,))


# ── oracles ──────────────────────────────────────────────────────────────────

def riemann_coefficient_1d(w, xi, grid=1 << 14):
    """Midpoint Fourier sum of the periodized window on a uniform grid."""
    xs = (np.arange(grid) + 0.5) / grid
    vals = an_star_spatial(w, xs[:, None])
    return complex(np.sum(vals * np.exp(-2j * np.pi * xi * xs)) / grid)


def midpoint_mean(fun, n, k, grid):
    """Mean over one period cell by the tensor midpoint rule."""
    t = (np.arange(grid) + 0.5) / (grid * n)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*([t] * k), indexing="ij")],
                    axis=1)
    return float(np.mean(fun(mesh)))


# ── exact coefficient support ────────────────────────────────────────────────

def test_coefficient_matches_riemann_1d():
    for xi in (2, 4, 6):
        exact = An_star_coefficient(W_1D, (xi,))
        assert abs(exact - riemann_coefficient_1d(W_1D, xi)) < 1e-10


def test_coefficient_vanishes_off_lattice_exactly():
    for n in range(2, 9):
        w = WindowProduct(BoxSpec(n, (Fraction(1, 4 * n),), (False,)), (INNER,))
        for xi in range(-32, 33):
            if xi % n != 0:
                assert An_star_coefficient(w, (xi,)) == 0j
    # two axes: one non-divisible component kills the coefficient
    w2 = WindowProduct(BoxSpec(3, (Fraction(1, 12), Fraction(1, 12)),
                               (False, False), (0.3, 0.7)), (INNER, INNER))
    for xi1 in range(-8, 9):
        for xi2 in range(-8, 9):
            if xi1 % 3 != 0 or xi2 % 3 != 0:
                assert An_star_coefficient(w2, (xi1, xi2)) == 0j
    assert riemann_coefficient_1d(W_1D, 3) == pytest.approx(0.0, abs=1e-12)


def test_zero_coefficient_is_mass():
    for w in (W_1D, W_MIX, W_SQ):
        lam = lambda_An_star(w)
        c0 = An_star_coefficient(w, (0,) * w.k)
        assert c0.imag == 0.0
        assert c0.real == pytest.approx(lam, rel=1e-14)
        assert lam > 0.0


def test_hermitian_symmetry():
    w = WindowProduct(BoxSpec(4, (Fraction(1, 16), Fraction(1, 32)),
                              (False, True), (0.37, 0.81)), (INNER, ANNULAR))
    rng = np.random.default_rng(SEED)
    for _ in range(12):
        t = rng.integers(-6, 7, size=2)
        xi = 4 * t
        a = An_star_coefficient(w, xi)
        b = An_star_coefficient(w, -xi)
        assert abs(b - a.conjugate()) < 1e-13 * max(1.0, abs(a))


def test_zero_coefficient_equals_spatial_mean():
    mean = midpoint_mean(lambda xs: an_star_spatial(W_MIX, xs), 4, 2, 2048)
    assert abs(mean - lambda_An_star(W_MIX)) < 1e-10


def test_integral_frequencies_required():
    with pytest.raises(ValueError):
        An_star_coefficient(W_1D, (1.5,))


# ── rectangle transforms ─────────────────────────────────────────────────────

def test_window_transform_zero_frequency():
    v = window_transform(W_MIX, np.zeros(2))
    expect = float(W_MIX.box.d[0]) * INNER.l1_norm \
        * float(W_MIX.box.d[1]) * ANNULAR.l1_norm
    assert v == pytest.approx(expect, rel=1e-13)


def test_window_transform_separability():
    ax1 = WindowProduct(BoxSpec(4, (Fraction(1, 16),), (False,)), (INNER,))
    ax2 = WindowProduct(BoxSpec(4, (Fraction(1, 32),), (True,)), (ANNULAR,))
    for xi in ((3.0, -5.0), (0.5, 11.0), (24.0, 2.25)):
        whole = window_transform(W_MIX, np.array(xi))
        split = window_transform(ax1, (xi[0],)) * window_transform(ax2, (xi[1],))
        assert whole == pytest.approx(split, rel=1e-12, abs=1e-15)


def test_shell_decay_uniform_constant():
    # max of |b_R^| 2^{4m} / prod(d) over dyadic dual shells m <= 8; one
    # frozen constant covers every shell of every tested box, and the
    # last shells are far below it (the envelope is super-polynomial)
    rng = np.random.default_rng(4242)
    worst = 0.0
    worst_tail = 0.0
    for w in (W_MIX, W_SQ, W_FINE):
        sc = shell_decay_scan(w, L=4, m_max=8, samples=16, rng=rng)
        worst = max(worst, float(sc.max()))
        worst_tail = max(worst_tail, float(sc[6:].max()))
    assert worst <= 400.0
    assert worst_tail <= 0.1


# ── normalized coefficients ──────────────────────────────────────────────────

def test_normalized_at_zero_is_one():
    for w in (W_1D, W_MIX, W_SQ):
        assert normalized_coefficient(w, (0,) * w.k) == pytest.approx(1.0, abs=1e-14)


def test_normalized_modulus_at_most_one():
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        t = rng.integers(-4, 5, size=2)
        assert abs(normalized_coefficient(W_MIX, 4 * t)) <= 1.0 + 1e-12


def test_normalized_dual_tail_fourth_power():
    # force one axis just outside t times the dual rectangle and check
    # |a_n| t^4 stays under a frozen constant for t in {2, 4, 8}
    rng = np.random.default_rng(777)
    n, d = W_MIX.box.n, W_MIX.box.d_float
    for t in (2, 4, 8):
        best = 0.0
        for _ in range(40):
            j = int(rng.integers(0, W_MIX.k))
            tv = np.zeros(W_MIX.k, dtype=int)
            for jj in range(W_MIX.k):
                cap = max(1, int(t / (d[jj] * n)))
                tv[jj] = rng.integers(-cap, cap + 1)
            mag = int(np.ceil(t / (d[j] * n))) + int(rng.integers(0, 4))
            tv[j] = mag * (1 if rng.random() < 0.5 else -1)
            best = max(best, abs(normalized_coefficient(W_MIX, n * tv)) * t ** 4)
        assert best <= 60.0


# ── spatial side ─────────────────────────────────────────────────────────────

def test_spatial_peak_and_support():
    # lattice point: inner windows peak at one; annular windows vanish
    assert an_star_spatial(W_SQ, np.zeros(2)) == 1.0
    assert an_star_spatial(W_MIX, np.zeros(2)) == 0.0
    # at distance n d the window support has closed off exactly
    far = np.array([0.25, 0.25])  # dist(2x) = 1/2 = n d on both axes
    assert an_star_spatial(W_SQ, far) == 0.0
    # mid-annulus on the half axis: x2/d = 3/4 hits the annular peak
    mid = np.array([[0.0, 3.0 / 128.0]])
    assert an_star_spatial(W_MIX, mid)[0] == 1.0


def test_spatial_values_in_unit_interval():
    rng = np.random.default_rng(SEED)
    xs = rng.random((4000, 2))
    for w in (W_MIX, W_SQ):
        vals = an_star_spatial(w, xs)
        assert np.all(vals >= 0.0)
        assert np.all(vals <= 1.0 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0, allow_nan=False), st.floats(0.0, 1.0, allow_nan=False))
def test_spatial_periodicity(u, v):
    x = np.array([u, v])
    a = an_star_spatial(W_MIX, x)
    b = an_star_spatial(W_MIX, np.mod(x + 0.25, 1.0))
    assert abs(a - b) < 1e-12


# ── smoothed systems ─────────────────────────────────────────────────────────

@pytest.fixture(scope="module")
def system():
    base = admissible_system(PowerLaw(0.5, 0.3), 0.3, m_max=5, k=2)
    return smoothed_system(base)


def test_f_n_bounds_and_support(system):
    rng = np.random.default_rng(SEED)
    xs = rng.random((3000, 2))
    vals = f_n_eval(system, 12, xs)
    assert np.all(vals >= 0.0)
    assert np.all(vals <= 1.0 + 1e-12)
    boxes = system.base.boxes_for(12)
    inside = union_mask(boxes, xs)
    assert np.all(inside[vals > 0.0])


def test_f_n_peaks_at_lattice_point(system):
    # the all-full row puts an inner peak at every lattice point; annular
    # rows vanish there, so the sum is exactly one
    assert system.eval(12, np.zeros(2)) == 1.0


def test_lambda_f_two_computations(system):
    n = 12
    alg = system.lambda_f(n)
    spat = midpoint_mean(lambda xs: system.eval(n, xs), n, 2, 1024)
    assert abs(alg - spat) < 1e-10
    total = sum(An_star_coefficient(w, (0, 0)).real
                for w in system.windows_for(n))
    assert alg == pytest.approx(total, rel=1e-12)


def test_weight_constant_across_block(system):
    # lambda(f_n) = n^k w_m: the weight is shared by the whole block
    w4 = system.weight(4)
    for n in (8, 11, 15):
        assert system.lambda_f(n) == pytest.approx(n ** 2 * w4, rel=1e-14)
    assert system.weight(1) == 0.0


# ── truncated Plancherel identity ────────────────────────────────────────────

def test_parseval_residual_small():
    res = parseval_check(W_SQ, 64)
    assert -1e-12 < res < 1e-8


def test_parseval_residual_shrinks():
    r16 = parseval_check(W_SQ, 16)
    r32 = parseval_check(W_SQ, 32)
    r64 = parseval_check(W_SQ, 64)
    assert r16 > r32 > r64 > -1e-12


def test_parseval_near_constant_window_mass():
    # plateau close to one with n d = 1/2 approaches the constant window:
    # the zero coefficient carries nearly all of the energy
    w = WindowProduct(BoxSpec(2, (Fraction(1, 4),), (False,)),
                      (BumpFunction("inner", 0.99),))
    ratio = abs(An_star_coefficient(w, (0,))) ** 2 / lambda_An_star_sq(w)
    assert ratio > 0.95


def test_parseval_cutoff_validation():
    with pytest.raises(ValueError):
        parseval_check(W_SQ, 33)
    with pytest.raises(ValueError):
        parseval_check(W_SQ, 0)


# ── validation ───────────────────────────────────────────────────────────────

def test_window_product_validation():
    box = BoxSpec(4, (Fraction(1, 16), Fraction(1, 32)), (False, True))
    with pytest.raises(ValueError):
        WindowProduct(box, (BumpFunction("wide_inner"), ANNULAR))
    with pytest.raises(ValueError):
        WindowProduct(box, (INNER, INNER))  # half axis needs annular
    with pytest.raises(ValueError):
        WindowProduct(box, (INNER,))  # arity mismatch


def test_smoothed_system_validation(system):
    with pytest.raises(ValueError):
        SmoothedSystem(system.base, ANNULAR, ANNULAR)
    with pytest.raises(ValueError):
        SmoothedSystem(system.base, INNER, INNER)


def test_squared_mass_needs_disjoint_translates():
    wide = WindowProduct(BoxSpec(2, (Fraction(3, 8),), (False,)), (INNER,))
    with pytest.raises(ValueError):
        lambda_An_star_sq(wide)

"""Surface and hyperplane measures: curvature, transforms, sampling, decay.

Oracles:
  * closed-form curvature at distinguished points (unit sphere, paraboloid)
  * the tensor quadrature path checked against the one-dimensional radial
    reduction where both apply
  * the hyperplane closed form checked against direct parametrized
    quadrature of the oscillatory integrand
  * a truncated Fourier pairing for mu(A*) checked against Monte Carlo
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from multbox.boxes import BoxSpec
from multbox.bumps import BumpFunction
from multbox.measures import (
    HyperplaneSpec,
    LebesgueCube,
    MonteCarlo,
    Quadrature,
    ResolutionCeiling,
    SurfacePatch,
    curvature,
    decay_fit,
    ellipsoid_patch,
    hyperplane_fourier,
    hyperplane_preset,
    mu_fourier,
    mu_of,
    paraboloid_patch,
    rotation_matrix,
    sample,
    sphere_cap_patch,
    tube_scan,
    validate_patch,
)
from multbox import measures as measures_mod
from multbox.windows import (
    An_star_coefficient,
    WindowProduct,
    an_star_spatial,
    lambda_An_star,
)

SEED = 77003

SPHERE3 = sphere_cap_patch(3)
SPHERE4 = sphere_cap_patch(4)
PARAB3 = paraboloid_patch(3)
ELLIP3 = ellipsoid_patch(3)


def normal_directions(patch, rng, count):
    """Unit normals of the graph at points drawn from the measure; the
    stationary-phase decay rate is only visible inside the normal cone."""
    pts = sample(patch, rng, count)
    u = pts[:, :patch.k - 1]
    grad = np.asarray(patch.gradient(u), dtype=float)
    d = np.column_stack([-grad, np.ones(len(u))])
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def fat_window(k):
    return WindowProduct(
        BoxSpec(2, (Fraction(1, 4),) * k, (False,) * k,
                tuple(0.1 + 0.2 * j for j in range(k))),
        (BumpFunction("inner"),) * k)


# ── curvature ────────────────────────────────────────────────────────────────

def test_curvature_unit_sphere_pole():
    assert curvature(SPHERE3, np.zeros(2)) == pytest.approx(1.0, abs=1e-12)


def test_curvature_paraboloid_origin():
    assert curvature(PARAB3, np.zeros(2)) == pytest.approx(1.0, abs=1e-12)


def test_curvature_sphere_k4_pole_magnitude():
    # odd tangential dimension flips the Hessian determinant sign
    assert curvature(SPHERE4, np.zeros(3)) == pytest.approx(-1.0, abs=1e-12)


def test_curvature_sphere_off_center_formula():
    u = np.array([0.2, -0.3])
    # for the unit sphere the Gaussian curvature is 1 everywhere
    assert curvature(SPHERE3, u) == pytest.approx(1.0, rel=1e-10)


def test_flat_patch_rejected():
    flat = SurfacePatch(
        3, (0.5, 0.5),
        graph=lambda u: np.zeros(len(np.atleast_2d(u))),
        gradient=lambda u: np.zeros_like(np.atleast_2d(u)),
        hessian=lambda u: np.zeros((len(np.atleast_2d(u)), 2, 2)),
        density=measures_mod._radial_density(0.4))
    with pytest.raises(ValueError, match="curvature"):
        validate_patch(flat)


def test_leaking_density_rejected():
    leaky = SurfacePatch(
        3, (0.3, 0.3),
        graph=SPHERE3.graph, gradient=SPHERE3.gradient, hessian=SPHERE3.hessian,
        density=lambda u: np.ones(len(np.atleast_2d(u))))
    with pytest.raises(ValueError, match="supported strictly inside"):
        validate_patch(leaky)


def test_presets_validate():
    for patch in (SPHERE3, SPHERE4, PARAB3, ELLIP3, paraboloid_patch(4)):
        assert validate_patch(patch) is patch


# ── transforms: exact values and structural bounds ───────────────────────────

def test_mu_fourier_at_zero_is_one():
    assert mu_fourier(SPHERE3, np.zeros(3)) == pytest.approx(1.0 + 0j, abs=1e-12)
    assert mu_fourier(ELLIP3, np.zeros(3)) == pytest.approx(1.0 + 0j, abs=1e-12)
    assert hyperplane_fourier(hyperplane_preset(3), np.zeros(3)) == pytest.approx(
        1.0 + 0j, abs=1e-9)
    assert mu_fourier(LebesgueCube(3), np.zeros(3)) == pytest.approx(1.0 + 0j, abs=1e-12)


def test_transform_bounded_by_one():
    rng = np.random.default_rng(SEED)
    hp = hyperplane_preset(3, eta=1e-2)
    for _ in range(40):
        xi = rng.uniform(-30, 30, size=3)
        assert abs(mu_fourier(SPHERE3, xi)) <= 1.0 + 1e-12
        assert abs(mu_fourier(hp, xi)) <= 1.0 + 1e-12
        assert abs(mu_fourier(LebesgueCube(3), xi)) <= 1.0 + 1e-12


def test_conjugate_symmetry():
    rng = np.random.default_rng(SEED + 1)
    hp = hyperplane_preset(3, eta=1e-2)
    for measure in (SPHERE3, ELLIP3, hp):
        for _ in range(6):
            xi = rng.uniform(-12, 12, size=3)
            a = mu_fourier(measure, xi)
            b = mu_fourier(measure, -xi)
            assert a == pytest.approx(b.conjugate(), abs=1e-9)


def test_radial_path_matches_tensor_path():
    rng = np.random.default_rng(SEED + 2)
    for patch in (SPHERE3, PARAB3):
        for _ in range(5):
            xi = rng.uniform(-14, 14, size=3)
            fast = measures_mod._radial_fourier(patch, xi, 10, 72, 4096)
            counts = measures_mod._patch_axis_counts(patch, xi, 10, 72)
            num, den = measures_mod._patch_contract(patch, counts, xi=xi)
            assert fast == pytest.approx(num / den, abs=5e-9)


def test_cube_transform_vanishes_on_nonzero_integers():
    cube = LebesgueCube(3)
    assert abs(mu_fourier(cube, np.array([0.0, 2.0, -1.0]))) < 1e-15
    assert abs(mu_fourier(cube, np.array([5.0, 1.0, 3.0]))) < 1e-15


def test_resolution_ceiling_raised():
    with pytest.raises(ResolutionCeiling):
        mu_fourier(ELLIP3, np.array([4e4, 3e4, 2e4]))
    with pytest.raises(ResolutionCeiling):
        mu_fourier(SPHERE3, np.array([1e7, 0.0, 1e7]))


def test_hyperplane_closed_form_vs_quadrature():
    hp = hyperplane_preset(3, eta=1e-2)
    for xi in (np.array([3.0, 1.0, 2.0]), np.array([0.5, 4.0, -2.5]),
               np.array([-2.0, 0.0, 6.0])):
        closed = hyperplane_fourier(hp, xi)
        re = measures_mod._hyperplane_quadrature(
            hp, lambda x: np.cos(2 * np.pi * (x @ xi)), 260)
        im = measures_mod._hyperplane_quadrature(
            hp, lambda x: -np.sin(2 * np.pi * (x @ xi)), 260)
        assert closed == pytest.approx(complex(re, im), abs=1e-7)


def test_rotation_frame():
    hp = hyperplane_preset(4)
    rot = rotation_matrix(hp)
    unit = np.asarray(hp.alpha) / np.linalg.norm(hp.alpha)
    assert np.allclose(rot.T @ rot, np.eye(4), atol=1e-12)
    assert np.allclose(rot[:, -1], unit, atol=1e-12)


def test_ell_counts_active_normal_components():
    assert hyperplane_preset(3).ell == 3
    assert HyperplaneSpec(alpha=(1.0, 0.0, 0.7), box=(0.4, 0.4),
                          radii=(0.0, 0.0)).ell == 2
    assert HyperplaneSpec(alpha=(1.0, 0.0), box=(0.4,), radii=(0.0,)).ell == 1


def test_hyperplane_validation():
    with pytest.raises(ValueError, match="normalized"):
        HyperplaneSpec(alpha=(2.0, 1.0))
    with pytest.raises(ValueError, match="radius"):
        HyperplaneSpec(alpha=(1.0, 0.5), box=(0.3,), radii=(0.3,))
    with pytest.raises(ValueError, match="nonnegative"):
        HyperplaneSpec(alpha=(1.0, 0.5), eta=-0.1)


# ── sampling ─────────────────────────────────────────────────────────────────

def test_sampling_deterministic_and_on_surface():
    a = sample(SPHERE3, np.random.default_rng(SEED), 3000)
    b = sample(SPHERE3, np.random.default_rng(SEED), 3000)
    assert np.array_equal(a, b)
    assert np.allclose(a[:, 2], np.sqrt(1 - a[:, 0] ** 2 - a[:, 1] ** 2), atol=1e-12)
    radii = np.hypot(a[:, 0], a[:, 1])
    assert radii.max() < SPHERE3.radial.support


def test_half_domain_density_keeps_samples_out():
    def dens(u):
        u = np.atleast_2d(u)
        base = measures_mod._radial_density(0.35)(u)
        return base * (u[:, 0] > 0.02)

    half = SurfacePatch(3, SPHERE3.half_widths, SPHERE3.graph, SPHERE3.gradient,
                        SPHERE3.hessian, dens)
    pts = sample(half, np.random.default_rng(SEED + 3), 2000)
    assert pts[:, 0].min() > 0.02


def test_hyperplane_samples_lie_on_slab():
    hp = hyperplane_preset(3, eta=1e-3, offset=0.3)
    pts = sample(hp, np.random.default_rng(SEED + 4), 4000)
    unit = np.asarray(hp.alpha) / np.linalg.norm(hp.alpha)
    transverse = pts @ unit - hp.offset
    assert np.abs(transverse).max() <= hp.eta + 1e-12
    # eta = 0 pins the points to the plane exactly
    flat = hyperplane_preset(3, eta=0.0, offset=0.3)
    pts0 = sample(flat, np.random.default_rng(SEED + 4), 1000)
    assert np.abs(pts0 @ unit - flat.offset).max() < 1e-12


def test_rejection_inefficiency_reported():
    skinny = sphere_cap_patch(3, cap=0.005)
    with pytest.raises(RuntimeError, match="acceptance rate"):
        sample(skinny, np.random.default_rng(SEED + 5), 5000)


# ── integration ──────────────────────────────────────────────────────────────

def test_mu_of_constant_is_exact():
    for measure in (SPHERE3, hyperplane_preset(3, eta=1e-2), LebesgueCube(2)):
        est = mu_of(measure, lambda x: np.ones(len(x)), Quadrature(order=30))
        assert est.value == pytest.approx(1.0, abs=1e-14)
        assert est.error == pytest.approx(0.0, abs=1e-14)


def test_monte_carlo_matches_quadrature_on_smooth_functions():
    rng = np.random.default_rng(SEED + 6)
    pts = sample(SPHERE3, np.random.default_rng(SEED + 7), 120_000)
    for _ in range(20):
        waves = rng.integers(-3, 4, size=(4, 3))
        coeffs = rng.normal(size=4)
        phases = rng.uniform(0, 2 * np.pi, size=4)

        def f(x, waves=waves, coeffs=coeffs, phases=phases):
            acc = np.zeros(len(x))
            for w, c, p in zip(waves, coeffs, phases):
                acc += c * np.cos(2 * np.pi * (x @ w) + p)
            return acc

        quad = mu_of(SPHERE3, f, Quadrature(order=44))
        vals = f(pts)
        mc_val = vals.mean()
        mc_se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(mc_val - quad.value) < 4 * mc_se + quad.error


def test_cube_integral_matches_window_mass():
    w = fat_window(3)
    lam = lambda_An_star(w)
    est = mu_of(LebesgueCube(3), lambda x: an_star_spatial(w, x),
                MonteCarlo(count=200_000, seed=SEED))
    assert abs(est.value - lam) < 4 * est.error


def test_parseval_pairing_matches_monte_carlo():
    for k, trunc in ((2, 24), (3, 12)):
        patch = sphere_cap_patch(k)
        w = fat_window(k)
        total = 0.0
        for t in itertools.product(range(-trunc, trunc + 1), repeat=k):
            xi = 2 * np.array(t)
            coeff = An_star_coefficient(w, xi)
            total += (coeff * mu_fourier(patch, -xi.astype(float))).real
        est = mu_of(patch, lambda x: an_star_spatial(w, x),
                    MonteCarlo(count=300_000, seed=SEED + k))
        assert abs(est.value - total) < 4 * est.error + 1e-4


def test_eta_zero_and_positive_converge():
    w = WindowProduct(BoxSpec(2, (Fraction(1, 8),) * 3, (False,) * 3,
                              (0.3, 0.1, 0.45)),
                      (BumpFunction("inner"),) * 3)
    f = lambda x: an_star_spatial(w, x)
    vals = {}
    for eta in (1e-2, 1e-3, 0.0):
        hp = hyperplane_preset(3, eta=eta)
        vals[eta] = mu_of(hp, f, Quadrature(order=140)).value
    gap_coarse = abs(vals[1e-2] - vals[0.0])
    gap_fine = abs(vals[1e-3] - vals[0.0])
    assert gap_fine < gap_coarse / 10
    assert gap_fine < 1e-5


# ── decay fitting ────────────────────────────────────────────────────────────

def test_sphere_decay_exponents():
    rng = np.random.default_rng(SEED + 8)
    fit3 = decay_fit(SPHERE3, normal_directions(SPHERE3, rng, 5),
                     r_min=32.0, octaves=3, per_octave=3, target=1.0)
    assert fit3.sigma == pytest.approx(1.0, abs=0.15)
    fit4 = decay_fit(SPHERE4, normal_directions(SPHERE4, rng, 5),
                     r_min=64.0, octaves=3, per_octave=3, target=1.5)
    assert fit4.sigma == pytest.approx(1.5, abs=0.2)


def test_decay_normalized_magnitudes_bounded():
    rng = np.random.default_rng(SEED + 9)
    fit = decay_fit(SPHERE3, normal_directions(SPHERE3, rng, 5),
                    r_min=16.0, octaves=4, per_octave=3)
    scaled = [m * r ** 1.0 for m, r in zip(fit.octave_maxima, fit.octave_radii)]
    assert max(scaled) < 3.0 * min(scaled)


def test_decay_fit_requires_three_octaves():
    with pytest.raises(ValueError, match="3 dyadic decades"):
        decay_fit(SPHERE3, np.array([[0.0, 0.0, 1.0]]), octaves=2)


def test_hyperplane_flat_along_normal():
    hp = hyperplane_preset(3, eta=1e-2)
    unit = np.asarray(hp.alpha) / np.linalg.norm(hp.alpha)
    fit = decay_fit(hp, unit[None, :], r_min=2.0, octaves=3, per_octave=4,
                    target=0.0)
    assert abs(fit.sigma) < 0.2
    assert min(fit.octave_maxima) > 0.8


def test_tube_profile_quartic_falloff():
    rng = np.random.default_rng(SEED + 10)
    rows = tube_scan(hyperplane_preset(3, eta=1e-2), (2, 4, 8), 60, rng)
    peak = {}
    for row in rows:
        peak[row["dilation"]] = max(peak.get(row["dilation"], 0.0), row["scaled"])
    # |mu^| t^4 stays below one dilation-independent constant
    assert max(peak.values()) < 1.0
    assert peak[8] <= max(peak[2], peak[4]) + 1e-6


def test_decay_fit_rows_schema():
    fit = decay_fit(SPHERE3, np.array([[0.1, 0.0, 1.0]]), r_min=8.0,
                    octaves=3, per_octave=2, target=1.0)
    rows = list(fit.rows())
    assert len(rows) == 6
    assert set(rows[0]) == {"radius", "direction", "magnitude"}
    summary = fit.summary()
    assert summary["target"] == 1.0
    assert len(summary["octave_maxima"]) == 3

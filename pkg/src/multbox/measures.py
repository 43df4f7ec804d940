"""Smooth measures on hypersurface patches and mollified hyperplane slabs.

Two families of probability measures live here.  A SurfacePatch carries a
graph x_k = g(u) over a box in R^{k-1}, weighted by a smooth density that
dies strictly inside the box; when the Gaussian curvature of the graph is
bounded away from zero on the support, |mu^(xi)| decays like
|xi|^{-(k-1)/2} and decay_fit measures that exponent.  A HyperplaneSpec
is the flat counterpart: Lebesgue measure on a box inside the hyperplane
<alpha, x> = offset, mollified tangentially at radii r_j and transversely
at width eta, so its transform is a closed-form product of box and bump
transforms in a rotated frame.  The transform concentrates on a dual tube
stretched by 1/eta along alpha and falls off at a fixed polynomial rate
outside any dilate of it.

Oscillatory patch transforms use tensor Gauss-Legendre quadrature with the
node count per axis tied to the local cycle count (never fewer than eight
nodes per period) and a hard ceiling instead of silent under-resolution.
Normalization is per rule: every integral is divided by the same-rule mass,
so mu^(0) = 1 exactly and |mu^| <= 1 holds structurally (positive weights,
nonnegative amplitude), not just to quadrature accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bumps import BumpFunction
from .errors import BudgetExceeded

__all__ = [
    "ResolutionCeiling",
    "SurfacePatch",
    "RadialProfile",
    "curvature",
    "validate_patch",
    "sphere_cap_patch",
    "paraboloid_patch",
    "ellipsoid_patch",
    "HyperplaneSpec",
    "hyperplane_preset",
    "rotation_matrix",
    "hyperplane_fourier",
    "LebesgueCube",
    "mu_fourier",
    "sample",
    "MonteCarlo",
    "Quadrature",
    "MuEstimate",
    "mu_of",
    "DecayFit",
    "decay_fit",
    "tube_scan",
]

NODES_PER_PERIOD = 8
BASE_NODES = 24
MAX_AXIS_NODES = 4096
MAX_TOTAL_NODES = 70_000_000
_CHUNK = 1 << 20
_MIN_ACCEPT_RATE = 1e-3


class ResolutionCeiling(BudgetExceeded):
    """The requested frequency needs more quadrature nodes than allowed."""


@lru_cache(maxsize=128)
def _gl_rule(n: int):
    xs, ws = leggauss(n)
    return xs, ws


def _gl_on(a: float, b: float, n: int):
    """Gauss-Legendre nodes and weights mapped onto [a, b]."""
    xs, ws = _gl_rule(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * xs, half * ws


# ── curved patches ───────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Rotationally symmetric reduction of a patch: graph height, slope and
    density as functions of the tangential radius, supported on [0, support].

    Symmetry turns the tangential integral into a closed-form angular
    average (cos, J0 or sinc depending on dimension), so the transform
    becomes one-dimensional and stays cheap at frequencies far past the
    tensor-quadrature ceiling.
    """

    height: Callable
    slope: Callable
    rho: Callable
    support: float


@dataclass(frozen=True, eq=False)
class SurfacePatch:
    """Graph patch x_k = g(u) over [-a_1, a_1] x ... with a smooth weight.

    The callables are vectorized over point arrays of shape (N, k-1):
    graph -> (N,), gradient -> (N, k-1), hessian -> (N, k-1, k-1),
    density -> (N,).  The density must vanish on a neighbourhood of the
    domain boundary; the measure is density times the surface area
    element, normalized to mass one.
    """

    k: int
    half_widths: tuple
    graph: Callable
    gradient: Callable
    hessian: Callable
    density: Callable
    name: str = "patch"
    radial: Optional[RadialProfile] = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("ambient dimension must be at least 2")
        object.__setattr__(self, "half_widths", tuple(float(a) for a in self.half_widths))
        if len(self.half_widths) != self.k - 1:
            raise ValueError("one half width per tangential axis required")
        if any(a <= 0 for a in self.half_widths):
            raise ValueError("half widths must be positive")

    def area_element(self, u) -> np.ndarray:
        grad = np.asarray(self.gradient(np.atleast_2d(u)), dtype=float)
        return np.sqrt(1.0 + np.sum(grad * grad, axis=-1))

    def weight(self, u) -> np.ndarray:
        """Unnormalized parametrized density: rho(u) sqrt(1 + |grad g|^2)."""
        u = np.atleast_2d(u)
        return np.asarray(self.density(u), dtype=float) * self.area_element(u)

    def ambient(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.column_stack([u, np.asarray(self.graph(u), dtype=float)])


def curvature(patch: SurfacePatch, u) -> Union[float, np.ndarray]:
    """Gaussian curvature of the graph at (u, g(u)).

    det(Hess g) / (1 + |grad g|^2)^{(k+1)/2}; the sign follows the
    Hessian determinant (a downward cap at k=4 reports -1, which is fine:
    only |K| bounded away from zero is ever required).
    """
    pts = np.atleast_2d(np.asarray(u, dtype=float))
    grad = np.asarray(patch.gradient(pts), dtype=float)
    hess = np.asarray(patch.hessian(pts), dtype=float)
    if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
        raise ValueError("non-finite derivatives on the patch")
    dets = np.linalg.det(hess)
    gsq = np.sum(grad * grad, axis=-1)
    out = dets / (1.0 + gsq) ** ((patch.k + 1) / 2.0)
    if np.ndim(u) == 1:
        return float(out[0])
    return out


def _grid(patch: SurfacePatch, per_axis: int) -> np.ndarray:
    axes = [np.linspace(-a, a, per_axis) for a in patch.half_widths]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@lru_cache(maxsize=None)
def _patch_profile(patch: SurfacePatch):
    """Grid scan: per-axis gradient bounds on the support, sup of the
    parametrized weight, minimum |curvature| on the support, and the
    largest density value on the boundary faces (should be zero)."""
    pts = _grid(patch, 41)
    dens = np.asarray(patch.density(pts), dtype=float)
    sup = float(dens.max())
    if sup <= 0:
        raise ValueError("density vanishes identically on the domain grid")
    live = dens > 1e-13 * sup
    grads = np.abs(np.asarray(patch.gradient(pts[live]), dtype=float))
    grad_bounds = tuple(float(g) for g in grads.max(axis=0))
    weight_sup = float(patch.weight(pts[live]).max())
    curv_min = float(np.min(np.abs(curvature(patch, pts[live]))))
    edge = np.zeros(1)
    for j, a in enumerate(patch.half_widths):
        for side in (-a, a):
            face = pts.copy()
            face[:, j] = side
            edge = np.maximum(edge, np.abs(np.asarray(patch.density(face), dtype=float)).max())
    return grad_bounds, weight_sup, curv_min, float(edge[0])


def validate_patch(patch: SurfacePatch, curvature_floor: float = 1e-9) -> SurfacePatch:
    """Reject flat directions and densities leaking to the boundary."""
    _, _, curv_min, edge = _patch_profile(patch)
    if edge > 1e-12:
        raise ValueError("density must be compactly supported strictly inside the domain")
    if curv_min < curvature_floor:
        raise ValueError(f"curvature falls to {curv_min:.2e} on the support; "
                         "flat patches are not admissible here")
    return patch


# ── patch presets ────────────────────────────────────────────────────────────

_DENSITY_BUMP = BumpFunction("inner")


def _radial_density(cap: float):
    def dens(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return _DENSITY_BUMP(np.sqrt(np.sum(u * u, axis=-1)) / cap)
    return dens


def sphere_cap_patch(k: int, *, half_width: Optional[float] = None,
                     cap: Optional[float] = None) -> SurfacePatch:
    """Cap of the unit sphere around the north pole, radial bump density."""
    a = half_width if half_width is not None else (0.55 if k == 3 else 0.45)
    if a * math.sqrt(k - 1) >= 0.98:
        raise ValueError("domain box reaches the equator; shrink half_width")
    c = cap if cap is not None else 0.8 * a

    def graph(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.sqrt(1.0 - np.sum(u * u, axis=-1))

    def gradient(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        g = np.sqrt(1.0 - np.sum(u * u, axis=-1))
        return -u / g[:, None]

    def hessian(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        g = np.sqrt(1.0 - np.sum(u * u, axis=-1))
        eye = np.eye(k - 1)
        return -(eye[None, :, :] / g[:, None, None]
                 + u[:, :, None] * u[:, None, :] / (g ** 3)[:, None, None])

    profile = RadialProfile(
        height=lambda r: np.sqrt(1.0 - np.asarray(r, dtype=float) ** 2),
        slope=lambda r: -np.asarray(r, dtype=float)
        / np.sqrt(1.0 - np.asarray(r, dtype=float) ** 2),
        rho=lambda r: _DENSITY_BUMP(np.asarray(r, dtype=float) / c),
        support=c)
    return SurfacePatch(k, (a,) * (k - 1), graph, gradient, hessian,
                        _radial_density(c), name=f"sphere-cap-k{k}",
                        radial=profile)


def paraboloid_patch(k: int, *, half_width: float = 0.5,
                     cap: Optional[float] = None) -> SurfacePatch:
    """Graph of |u|^2 / 2; unit curvature at the origin in every dimension."""
    c = cap if cap is not None else 0.8 * half_width

    def graph(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return 0.5 * np.sum(u * u, axis=-1)

    def gradient(u):
        return np.atleast_2d(np.asarray(u, dtype=float)).copy()

    def hessian(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.broadcast_to(np.eye(k - 1), (len(u), k - 1, k - 1)).copy()

    profile = RadialProfile(
        height=lambda r: 0.5 * np.asarray(r, dtype=float) ** 2,
        slope=lambda r: np.asarray(r, dtype=float).copy(),
        rho=lambda r: _DENSITY_BUMP(np.asarray(r, dtype=float) / c),
        support=c)
    return SurfacePatch(k, (half_width,) * (k - 1), graph, gradient, hessian,
                        _radial_density(c), name=f"paraboloid-k{k}",
                        radial=profile)


def ellipsoid_patch(k: int, *, semiaxes: Optional[Sequence[float]] = None,
                    half_width: Optional[float] = None,
                    cap: Optional[float] = None) -> SurfacePatch:
    """Upper patch of an axis-aligned ellipsoid sum (u_j/a_j)^2 + (x_k/c)^2 = 1."""
    if semiaxes is None:
        semiaxes = tuple(1.0 + 0.25 * j for j in range(k - 1)) + (0.7,)
    semiaxes = tuple(float(s) for s in semiaxes)
    if len(semiaxes) != k or any(s <= 0 for s in semiaxes):
        raise ValueError("need k positive semiaxes")
    tang, height = np.array(semiaxes[:-1]), semiaxes[-1]
    a = half_width if half_width is not None else 0.45 * float(tang.min())
    if np.sum((a / tang) ** 2) >= 0.96:
        raise ValueError("domain box reaches the ellipsoid equator")
    c = cap if cap is not None else 0.8 * a

    def radicand(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return 1.0 - np.sum((u / tang[None, :]) ** 2, axis=-1)

    def graph(u):
        return height * np.sqrt(radicand(u))

    def gradient(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        s = np.sqrt(radicand(u))
        return -height * u / (tang[None, :] ** 2 * s[:, None])

    def hessian(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        s = np.sqrt(radicand(u))
        scaled = u / tang[None, :] ** 2
        eye = np.eye(k - 1) / tang[None, :] ** 2
        return -height * (eye[None, :, :] / s[:, None, None]
                          + scaled[:, :, None] * scaled[:, None, :] / (s ** 3)[:, None, None])

    return SurfacePatch(k, (a,) * (k - 1), graph, gradient, hessian,
                        _radial_density(c), name=f"ellipsoid-k{k}")


# ── mollified hyperplanes ────────────────────────────────────────────────────

_MOLLIFIER = BumpFunction("inner")


@dataclass(frozen=True, eq=False)
class HyperplaneSpec:
    """Box patch of the hyperplane <alpha, x> = offset * |alpha|, mollified.

    alpha is normalized as (1, alpha_2, ..., alpha_k).  The tangential
    support is the box prod [-B_j, B_j] in a rotated frame whose last
    axis points along alpha; each tangential axis is convolved with an
    inner bump at radius r_j and the transverse axis carries a bump of
    width eta.  eta = 0 keeps the measure flat on the hyperplane (direct
    parametrization, no transverse limit), with the tangential
    mollification retained so the eta > 0 family converges to it.
    """

    alpha: tuple
    offset: float = 0.0
    box: tuple = ()
    radii: tuple = ()
    eta: float = 0.0
    name: str = "hyperplane"

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) < 2:
            raise ValueError("need ambient dimension at least 2")
        if alpha[0] != 1.0:
            raise ValueError("normal vector must be normalized as (1, a_2, ..., a_k)")
        object.__setattr__(self, "alpha", alpha)
        k = len(alpha)
        box = tuple(float(b) for b in (self.box or (0.4,) * (k - 1)))
        radii = tuple(float(r) for r in (self.radii or (0.0,) * (k - 1)))
        if len(box) != k - 1 or len(radii) != k - 1:
            raise ValueError("need k-1 box half widths and k-1 mollification radii")
        if any(b <= 0 for b in box) or any(r < 0 for r in radii):
            raise ValueError("box half widths positive, radii nonnegative")
        if any(r >= b for r, b in zip(radii, box)):
            raise ValueError("mollification radius must stay below the box half width")
        if self.eta < 0:
            raise ValueError("transverse width must be nonnegative")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "radii", radii)

    @property
    def k(self) -> int:
        return len(self.alpha)

    @property
    def ell(self) -> int:
        """1 plus the number of nonzero later normal components."""
        return 1 + sum(1 for a in self.alpha[1:] if a != 0.0)

    def center(self) -> np.ndarray:
        unit = np.asarray(self.alpha, dtype=float)
        unit /= np.linalg.norm(unit)
        return self.offset * unit


def hyperplane_preset(k: int, *, eta: float = 1e-2, offset: float = 0.0) -> HyperplaneSpec:
    """Generic tilted hyperplane with all normal components active."""
    tilts = (0.6, -0.35, 0.2)
    return HyperplaneSpec(alpha=(1.0,) + tilts[:k - 1], offset=offset,
                          box=(0.4,) * (k - 1), radii=(0.05,) * (k - 1),
                          eta=eta, name=f"hyperplane-k{k}")


@lru_cache(maxsize=None)
def _rotation(spec: HyperplaneSpec) -> np.ndarray:
    alpha = np.asarray(spec.alpha, dtype=float)
    unit = alpha / np.linalg.norm(alpha)
    k = unit.size
    pivot = int(np.argmax(np.abs(unit)))
    cols = [unit]
    for j in range(k):
        if j == pivot:
            continue
        v = np.zeros(k)
        v[j] = 1.0
        for c in cols:
            v -= (v @ c) * c
        v /= np.linalg.norm(v)
        cols.append(v)
    return np.column_stack(cols[1:] + [unit])


def rotation_matrix(spec: HyperplaneSpec) -> np.ndarray:
    """Deterministic orthogonal frame whose last column is alpha/|alpha|."""
    return _rotation(spec).copy()


def _ramp(u: np.ndarray, half: float, radius: float) -> np.ndarray:
    """Convolution of the box indicator [-half, half] with the radius-scaled
    inner bump, normalized to peak one.  The overlap interval is mapped onto
    a fixed Gauss rule so the integrand stays smooth (spectral accuracy)."""
    u = np.asarray(u, dtype=float)
    if radius == 0.0:
        return (np.abs(u) <= half).astype(float)
    lo = np.maximum(-1.0, (u - half) / radius)
    hi = np.minimum(1.0, (u + half) / radius)
    width = np.maximum(hi - lo, 0.0)
    xs, ws = _gl_rule(48)
    nodes = 0.5 * (lo + hi)[:, None] + 0.5 * width[:, None] * xs[None, :]
    vals = _MOLLIFIER(nodes)
    return (vals @ ws) * 0.5 * width / _MOLLIFIER.l1_norm


def hyperplane_fourier(spec: HyperplaneSpec, xi) -> complex:
    """Closed-form transform: rotated product of box sincs, tangential bump
    transforms, and the transverse bump transform."""
    xi = np.asarray(xi, dtype=float).reshape(spec.k)
    rot = _rotation(spec)
    v = rot.T @ xi

    def ratio(u):
        # |b^(u)| <= b^(0) holds exactly for a nonnegative bump; clamping
        # only removes the 1e-8 interpolation slack of the fast transform.
        r = _MOLLIFIER.transform_fast(u) / _MOLLIFIER.l1_norm
        return max(-1.0, min(1.0, float(r)))

    out = 1.0
    for j, (half, radius) in enumerate(zip(spec.box, spec.radii)):
        out *= float(np.sinc(2.0 * half * v[j]))
        if radius > 0:
            out *= ratio(radius * v[j])
    if spec.eta > 0:
        out *= ratio(spec.eta * v[-1])
    phase = -2.0 * math.pi * float(xi @ spec.center())
    return complex(out * math.cos(phase), out * math.sin(phase))


# ── reference cube measure ───────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class LebesgueCube:
    """Lebesgue measure on [0, 1)^k; the trivial oracle everything meets."""

    k: int
    name: str = "lebesgue"


# ── Fourier evaluation ───────────────────────────────────────────────────────

def _patch_axis_counts(patch: SurfacePatch, xi: np.ndarray,
                       nodes_per_period: int, base_nodes: int) -> tuple:
    grad_bounds = _patch_profile(patch)[0]
    counts = []
    for j, a in enumerate(patch.half_widths):
        cycles = (abs(xi[j]) + abs(xi[-1]) * grad_bounds[j]) * 2.0 * a
        counts.append(base_nodes + int(math.ceil(nodes_per_period * cycles)))
    return tuple(counts)


def _check_ceiling(counts: Sequence[int], max_axis: int, max_total: int):
    total = math.prod(counts)
    if max(counts) > max_axis or total > max_total:
        raise ResolutionCeiling(
            f"oscillatory quadrature would need {counts} nodes "
            f"({total} total) against ceiling {max_axis}/axis, {max_total} total")


def _patch_contract(patch: SurfacePatch, counts: Sequence[int],
                    xi: Optional[np.ndarray] = None,
                    func: Optional[Callable] = None) -> tuple:
    """Tensor Gauss-Legendre sums of weight*e(-<xi, x>)*f over the patch,
    chunked along the first axis; returns (numerator, same-rule mass)."""
    dim = patch.k - 1
    axes = [_gl_on(-a, a, c) for a, c in zip(patch.half_widths, counts)]
    rest_nodes = [ax[0] for ax in axes[1:]]
    if rest_nodes:
        mesh = np.meshgrid(*rest_nodes, indexing="ij")
        rest_cols = [m.ravel() for m in mesh]
        wrest = axes[1][1]
        for _, w in axes[2:]:
            wrest = np.multiply.outer(wrest, w).ravel()
    else:
        rest_cols, wrest = [], np.ones(1)
    r_size = wrest.size
    rows = max(1, _CHUNK // r_size)
    num = 0.0 + 0.0j if xi is not None else 0.0
    den = 0.0
    x0, w0 = axes[0]
    for i0 in range(0, len(x0), rows):
        xs0 = x0[i0:i0 + rows]
        b = len(xs0)
        cols = [np.repeat(xs0, r_size)]
        for col in rest_cols:
            cols.append(np.tile(col, b))
        pts = np.column_stack(cols) if dim > 1 else cols[0][:, None]
        wts = (w0[i0:i0 + rows][:, None] * wrest[None, :]).ravel()
        core = wts * patch.weight(pts)
        den += float(core.sum())
        if func is not None:
            core = core * np.asarray(func(patch.ambient(pts)), dtype=float)
        if xi is not None:
            ph = pts @ xi[:-1] + np.asarray(patch.graph(pts), dtype=float) * xi[-1]
            num += complex((core * np.exp(-2j * math.pi * ph)).sum())
        else:
            num += float(core.sum())
    return num, den


@lru_cache(maxsize=None)
def _radial_slope_bound(profile: RadialProfile) -> float:
    rs = np.linspace(0.0, profile.support, 2049)
    return float(np.max(np.abs(np.asarray(profile.slope(rs), dtype=float))))


def _radial_fourier(patch: SurfacePatch, xi: np.ndarray, nodes_per_period: int,
                    base_nodes: int, max_axis_nodes: int) -> complex:
    """One-dimensional transform of a rotationally symmetric patch.

    The tangential angular average of e(-<xi', u>) over the shell |u| = r
    is cos(2 pi s r), J0(2 pi s r) or sinc(2 s r) for one, two or three
    tangential dimensions (s = |xi'|), leaving a single radial integral
    against r^{dt-1} times the weighted profile.
    """
    prof = patch.radial
    dt = patch.k - 1
    s = float(np.linalg.norm(xi[:-1]))
    cycles = (s + abs(xi[-1]) * _radial_slope_bound(prof)) * prof.support
    count = base_nodes + int(math.ceil(nodes_per_period * cycles))
    if count > max_axis_nodes * 16:
        raise ResolutionCeiling(
            f"radial quadrature would need {count} nodes against "
            f"ceiling {max_axis_nodes * 16}")
    rs, ws = _gl_on(0.0, prof.support, count)
    slope = np.asarray(prof.slope(rs), dtype=float)
    core = ws * rs ** (dt - 1) * np.asarray(prof.rho(rs), dtype=float) \
        * np.sqrt(1.0 + slope * slope)
    if dt == 1:
        kernel = np.cos(2.0 * math.pi * s * rs)
    elif dt == 2:
        from scipy.special import j0
        kernel = j0(2.0 * math.pi * s * rs)
    else:
        kernel = np.sinc(2.0 * s * rs)
    osc = np.exp(-2j * math.pi * np.asarray(prof.height(rs), dtype=float) * xi[-1])
    return complex((core * kernel * osc).sum() / core.sum())


def mu_fourier(measure, xi, *, nodes_per_period: int = NODES_PER_PERIOD,
               base_nodes: int = BASE_NODES, max_axis_nodes: int = MAX_AXIS_NODES,
               max_total_nodes: int = MAX_TOTAL_NODES) -> complex:
    """Transform int e(-<xi, x>) dmu at a single frequency.

    Patches go through oscillation-adaptive quadrature (one-dimensional
    when a radial profile is attached, tensor otherwise) and refuse
    frequencies past the node ceiling; hyperplanes and the cube use their
    closed forms at any frequency.
    """
    if isinstance(measure, HyperplaneSpec):
        return hyperplane_fourier(measure, xi)
    if isinstance(measure, LebesgueCube):
        v = np.asarray(xi, dtype=float).reshape(measure.k)
        return complex(np.prod(np.exp(-1j * math.pi * v) * np.sinc(v)))
    patch = measure
    vec = np.asarray(xi, dtype=float).reshape(patch.k)
    if patch.radial is not None:
        return _radial_fourier(patch, vec, nodes_per_period, base_nodes,
                               max_axis_nodes)
    counts = _patch_axis_counts(patch, vec, nodes_per_period, base_nodes)
    _check_ceiling(counts, max_axis_nodes, max_total_nodes)
    num, den = _patch_contract(patch, counts, xi=vec)
    return complex(num / den)


# ── sampling ─────────────────────────────────────────────────────────────────

def _rejection_1d(rng, count, lo, hi, accept_prob, min_rate):
    out = []
    drawn = kept = 0
    while kept < count:
        m = max(4 * (count - kept), 1024)
        u = rng.uniform(lo, hi, size=m)
        p = accept_prob(u)
        take = u[rng.random(m) < p]
        out.append(take)
        drawn += m
        kept += take.size
        if drawn >= 50_000 and kept < min_rate * drawn:
            raise RuntimeError(f"rejection sampler acceptance rate "
                               f"{kept / drawn:.2e} below the configured bound")
    return np.concatenate(out)[:count]


def sample(measure, rng, count: int, *, min_accept_rate: float = _MIN_ACCEPT_RATE,
           envelope_headroom: float = 1.3) -> np.ndarray:
    """Draw ambient points distributed per the measure; deterministic in rng."""
    if isinstance(measure, LebesgueCube):
        return rng.random((count, measure.k))
    if isinstance(measure, HyperplaneSpec):
        spec = measure
        cols = []
        for half, radius in zip(spec.box, spec.radii):
            reach = half + radius
            cols.append(_rejection_1d(
                rng, count, -reach, reach,
                lambda u, h=half, r=radius: _ramp(u, h, r), min_accept_rate))
        if spec.eta > 0:
            cols.append(_rejection_1d(
                rng, count, -spec.eta, spec.eta,
                lambda s: _MOLLIFIER(s / spec.eta), min_accept_rate))
        else:
            cols.append(np.zeros(count))
        frame = np.column_stack(cols)
        return frame @ _rotation(spec).T + spec.center()[None, :]
    patch = measure
    sup = _patch_profile(patch)[1] * envelope_headroom
    dim = patch.k - 1
    lo = -np.asarray(patch.half_widths)
    hi = np.asarray(patch.half_widths)
    out = []
    drawn = kept = 0
    while kept < count:
        m = max(2 * (count - kept), 1024)
        u = rng.uniform(lo, hi, size=(m, dim))
        w = patch.weight(u)
        if w.max() > sup:
            raise RuntimeError("weight envelope exceeded; profile grid too coarse")
        take = u[rng.random(m) * sup < w]
        out.append(take)
        drawn += m
        kept += len(take)
        if drawn >= 50_000 and kept < min_accept_rate * drawn:
            raise RuntimeError(f"rejection sampler acceptance rate "
                               f"{kept / drawn:.2e} below the configured bound")
    u = np.concatenate(out)[:count]
    return patch.ambient(u)


# ── integration ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MonteCarlo:
    """Sample-mean integration: count draws from a dedicated seeded stream."""

    count: int
    seed: int


@dataclass(frozen=True)
class Quadrature:
    """Tensor rule integration at a caller-chosen order per axis; the
    reported error is the change under an order bump, not a certificate."""

    order: int


@dataclass(frozen=True)
class MuEstimate:
    value: float
    error: float
    method: str


def _hyperplane_quadrature(spec: HyperplaneSpec, func, order: int) -> float:
    axes = []
    for half, radius in zip(spec.box, spec.radii):
        reach = half + radius
        xs, ws = _gl_on(-reach, reach, order)
        axes.append((xs, ws * _ramp(xs, half, radius)))
    if spec.eta > 0:
        xs, ws = _gl_on(-spec.eta, spec.eta, max(order, 16))
        axes.append((xs, ws * _MOLLIFIER(xs / spec.eta)))
    mesh = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wts = axes[0][1]
    for _, w in axes[1:]:
        wts = np.multiply.outer(wts, w).ravel()
    if spec.eta == 0:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    ambient = pts @ _rotation(spec).T + spec.center()[None, :]
    vals = np.asarray(func(ambient), dtype=float)
    return float((wts * vals).sum() / wts.sum())


def _cube_quadrature(cube: LebesgueCube, func, order: int) -> float:
    xs, ws = _gl_on(0.0, 1.0, order)
    mesh = np.meshgrid(*([xs] * cube.k), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wts = ws
    for _ in range(cube.k - 1):
        wts = np.multiply.outer(wts, ws).ravel()
    vals = np.asarray(func(pts), dtype=float)
    return float((wts * vals).sum() / wts.sum())


def _quadrature_value(measure, func, order: int) -> float:
    if isinstance(measure, LebesgueCube):
        return _cube_quadrature(measure, func, order)
    if isinstance(measure, HyperplaneSpec):
        return _hyperplane_quadrature(measure, func, order)
    counts = (order,) * (measure.k - 1)
    _check_ceiling(counts, MAX_AXIS_NODES, MAX_TOTAL_NODES)
    num, den = _patch_contract(measure, counts, func=func)
    return float(num / den)


def mu_of(measure, func, method) -> MuEstimate:
    """Integrate a pointwise function of ambient position against the measure."""
    if isinstance(method, MonteCarlo):
        pts = sample(measure, np.random.default_rng(method.seed), method.count)
        vals = np.asarray(func(pts), dtype=float)
        se = float(vals.std(ddof=1) / math.sqrt(method.count)) if method.count > 1 else math.inf
        return MuEstimate(float(vals.mean()), se, f"mc:{method.count}")
    if isinstance(method, Quadrature):
        coarse = _quadrature_value(measure, func, method.order)
        fine = _quadrature_value(measure, func, method.order + 12)
        return MuEstimate(fine, abs(fine - coarse), f"gl:{method.order}")
    raise TypeError(f"unknown integration method {method!r}")


# ── decay fitting ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DecayFit:
    """Per-octave peak magnitudes of |mu^| and the fitted decay exponent."""

    frequencies: tuple
    magnitudes: tuple
    octave_radii: tuple
    octave_maxima: tuple
    sigma: float
    stderr: float
    target: Optional[float]

    def rows(self):
        for freq, mag in zip(self.frequencies, self.magnitudes):
            yield {"radius": float(np.linalg.norm(freq)),
                   "direction": ",".join(f"{c:.6f}" for c in np.asarray(freq) /
                                         max(np.linalg.norm(freq), 1e-300)),
                   "magnitude": mag}

    def summary(self):
        return {"sigma": self.sigma, "stderr": self.stderr, "target": self.target,
                "octave_radii": list(self.octave_radii),
                "octave_maxima": list(self.octave_maxima)}


def _unit_directions(measure, directions, rng) -> np.ndarray:
    k = measure.k
    if isinstance(directions, (int, np.integer)):
        if rng is None:
            raise ValueError("an rng is required to draw random directions")
        v = rng.normal(size=(int(directions), k))
        return v / np.linalg.norm(v, axis=1, keepdims=True)
    arr = np.atleast_2d(np.asarray(directions, dtype=float))
    if arr.shape[1] != k:
        raise ValueError("direction vectors must match the ambient dimension")
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def decay_fit(measure, directions, *, r_min: float = 4.0, octaves: int = 3,
              per_octave: int = 3, rng=None, target: Optional[float] = None,
              **fourier_kwargs) -> DecayFit:
    """Least-squares decay exponent of |mu^| over per-octave maxima.

    Radii sweep octaves [r_min 2^i, r_min 2^{i+1}); each octave's maximum
    over all sampled directions and radii enters the log-log fit, so a
    single slow direction dominates honestly rather than averaging out.
    """
    if octaves < 3:
        raise ValueError("need at least 3 dyadic decades for a decay fit")
    dirs = _unit_directions(measure, directions, rng)
    freqs, mags = [], []
    oct_radii, oct_maxima = [], []
    for i in range(octaves):
        radii = np.geomspace(r_min * 2.0 ** i, r_min * 2.0 ** (i + 1),
                             per_octave, endpoint=False)
        peak = 0.0
        for r in radii:
            for d in dirs:
                xi = r * d
                mag = abs(mu_fourier(measure, xi, **fourier_kwargs))
                freqs.append(tuple(xi))
                mags.append(mag)
                peak = max(peak, mag)
        oct_radii.append(r_min * 2.0 ** (i + 0.5))
        oct_maxima.append(peak)
    logs_r = np.log2(oct_radii)
    logs_m = np.log2(np.maximum(oct_maxima, 1e-300))
    (slope, _), cov = np.polyfit(logs_r, logs_m, 1, cov="unscaled" if octaves < 4 else True)
    return DecayFit(tuple(freqs), tuple(mags), tuple(oct_radii), tuple(oct_maxima),
                    sigma=float(-slope), stderr=float(math.sqrt(max(cov[0][0], 0.0))),
                    target=target)


def tube_scan(spec: HyperplaneSpec, dilations: Sequence[int], per_dilation: int,
              rng) -> list:
    """Sample frequencies just outside dilates of the dual tube.

    The dual tube scales like 1/B_j across and 1/eta along the normal; for
    each dilation t the scan draws frequencies in the shell between t and
    2t times the tube and records |mu^| t^4, whose ceiling should stay flat
    in t when the transform obeys the quartic falloff.
    """
    if spec.eta <= 0:
        raise ValueError("tube scans need a positive transverse width")
    scales = np.array([1.0 / b for b in spec.box] + [1.0 / spec.eta])
    rot = _rotation(spec)
    rows = []
    for t in dilations:
        for _ in range(per_dilation):
            while True:
                v = rng.uniform(-2.0 * t, 2.0 * t, size=spec.k)
                if np.max(np.abs(v)) > t:
                    break
            xi = rot @ (v * scales)
            mag = abs(hyperplane_fourier(spec, xi))
            rows.append({"dilation": t, "magnitude": mag,
                         "scaled": mag * t ** 4})
    return rows

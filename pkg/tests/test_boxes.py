"""Box families, covers, admissible systems, star-shape property.

Exactness oracle: all scales are dyadic rationals, so axis measures and
volume products are checked as Fraction identities.  Geometric oracles:
seeded Monte Carlo membership frequencies and rejection-sampled points
of the hyperbolic set.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multbox.boxes import (
    AdmissibleSystem,
    BoxSpec,
    admissible_system,
    axis_measure,
    block_of,
    box_from_dict,
    box_to_dict,
    box_volume,
    grid_size,
    inner_cover,
    outer_cover,
    random_box,
    union_mask,
    verify_property_P,
)
from multbox.core import hyperbolic_volume, membership_mask, mult_error
from multbox.psi import LogPower, PowerLaw, Table

SEED = 99173


def reject_sample_A(rng, n, psi_n, k, count):
    """Uniform points of the hyperbolic set A_n by rejection."""
    out = []
    while len(out) < count:
        xs = rng.random((20000, k))
        keep = membership_mask(xs, n, psi_n)
        out.extend(xs[keep])
    return np.asarray(out[:count])


# ── axis measures and volumes ────────────────────────────────────────────────

def test_axis_measure_examples():
    assert axis_measure(2, Fraction(1, 20), False) == Fraction(1, 5)
    assert axis_measure(2, Fraction(1, 20), True) == Fraction(1, 10)
    # saturation: once 2 n d >= 1 the full axis is covered
    assert axis_measure(4, Fraction(1, 4), False) == 1


def test_box_volume_is_product_of_axis_measures():
    b = BoxSpec(3, (Fraction(1, 16), Fraction(1, 32)), (False, True))
    want = axis_measure(3, Fraction(1, 16), False) * axis_measure(3, Fraction(1, 32), True)
    assert box_volume(b) == want


def test_box_volume_against_monte_carlo():
    rng = np.random.default_rng(SEED)
    for _ in range(8):
        n = int(rng.integers(2, 17))
        b = random_box(rng, 2, n)
        xs = rng.random((200000, 2))
        p = b.mask(xs).mean()
        v = float(box_volume(b))
        se = math.sqrt(max(v * (1 - v), 1e-9) / len(xs))
        assert abs(p - v) <= 4 * se


def test_membership_examples():
    near = BoxSpec(1, (Fraction(1, 100), Fraction(1, 100)), (False, False))
    assert near.membership((0.001, 0.999))
    annulus = BoxSpec(2, (Fraction(1, 8), Fraction(1, 8)), (True, True))
    # distances below n d / 2 = 1/8 are excluded by the half type
    assert not annulus.membership((0.01, 0.3))
    assert annulus.membership((0.4, 0.1))  # dists .2, .2 in [1/8, 1/4)


def test_box_spec_validation():
    with pytest.raises(ValueError):
        BoxSpec(4, (Fraction(1, 2),), (False,))  # d > 1/n
    with pytest.raises(ValueError):
        BoxSpec(0, (Fraction(1, 4),), (False,))
    with pytest.raises(ValueError):
        BoxSpec(2, (Fraction(1, 8),), (False, False))
    with pytest.raises(ValueError):
        BoxSpec(2, (Fraction(1, 8), Fraction(1, 8)), (False, False), (0.1,))


def test_sampler_lands_inside_box():
    rng = np.random.default_rng(SEED)
    b = BoxSpec(5, (Fraction(1, 16), Fraction(1, 64)), (False, True), (0.3, 0.7))
    xs = b.sample(rng, 5000)
    assert b.mask(xs).all()


# ── outer cover ──────────────────────────────────────────────────────────────

def test_outer_cover_box_count_enumeration():
    # k=2, psi(n)=2^-10, n=8: dyadic h in [2^-13, 2^-3] gives 11 boxes
    psi = Table(values=tuple([0.0] * 7 + [2.0 ** -10]))
    cover = outer_cover(8, psi, 2)
    assert len(cover) == 11


def test_outer_cover_degenerate_and_empty():
    big = Table(values=(0.3,) * 8)  # 0.3 >= 2^-2
    cover = outer_cover(4, big, 2)
    assert len(cover) == 1
    assert box_volume(cover[0]) == 1
    zero = Table(values=(0.0,) * 8)
    assert outer_cover(4, zero, 2) == []


def test_outer_cover_contains_hyperbolic_set():
    rng = np.random.default_rng(SEED)
    psi = PowerLaw(c=0.25, tau=1.2)
    for k, n in [(2, 8), (2, 37), (3, 16)]:
        cover = outer_cover(n, psi, k)
        pts = reject_sample_A(rng, n, psi(n), k, 10000)
        assert union_mask(cover, pts).all()


def test_outer_cover_k1_reproduces_the_set():
    psi = PowerLaw(c=0.3, tau=1.0)
    cover = outer_cover(6, psi, 1)
    rng = np.random.default_rng(SEED)
    xs = rng.random((50000, 1))
    assert np.array_equal(union_mask(cover, xs),
                          membership_mask(xs, 6, psi(6)))


# ── inner cover and admissible systems ───────────────────────────────────────

def test_block_of():
    assert block_of(1) == 1
    assert block_of(2) == 2
    assert block_of(3) == 2
    assert block_of(8) == 4
    assert block_of(1023) == 10
    assert block_of(1024) == 11


def test_inner_cover_rejects_block_mismatch():
    psi = LogPower(2)
    with pytest.raises(ValueError):
        inner_cover(8, 5, psi, 2, 0.01)
    with pytest.raises(ValueError):
        inner_cover(8, 4, psi, 2, 0.6)  # tau outside (0, 1/k)


def test_inner_cover_constant_product_exact():
    sys2 = admissible_system(LogPower(2), 0.2, m_max=12, k=2)
    for m in range(sys2.m_min, 13):
        rows = sys2.rows(m)
        if not rows:
            continue
        target = Fraction(sys2.psi(2 ** m)) / Fraction(2) ** (2 * m)
        for d_row, _ in rows:
            prod = Fraction(1)
            for v in d_row:
                prod *= v
            assert prod == target


def test_inner_cover_boxes_disjoint_by_sampling():
    sys2 = admissible_system(LogPower(2), 0.4, m_max=10, k=2)
    boxes = sys2.boxes_for(700)
    assert len(boxes) > 1
    rng = np.random.default_rng(SEED)
    xs = rng.random((200000, 2))
    total = np.zeros(len(xs), dtype=int)
    for b in boxes:
        total += b.mask(xs)
    assert total.max() <= 1


def test_inner_cover_boxes_inside_hyperbolic_set():
    rng = np.random.default_rng(SEED)
    for k, tau, n in [(2, 0.2, 300), (3, 0.01, 200)]:
        sysk = admissible_system(LogPower(2), tau, m_max=block_of(n), k=k)
        boxes = sysk.boxes_for(n)
        assert boxes, "expected a non-empty block"
        thr = float(sysk.psi(n))
        for b in boxes:
            pts = b.sample(rng, 4000)
            assert membership_mask(pts, n, thr).all()
            assert b.in_strict_window()


def test_admissible_system_strict_window_and_constants():
    sys3 = admissible_system(LogPower(2), 0.01, m_max=11, k=3)
    lo, hi = sys3.window_constants()
    assert 0 < lo <= hi < math.inf
    for n in (150, 900):
        for b in sys3.boxes_for(n):
            assert b.in_strict_window()


def test_admissible_system_empty_blocks_allowed():
    sys3 = admissible_system(LogPower(2), 0.01, m_max=6, k=3)
    # the first blocks die: psi vanishes below n=3, so the m=2 block
    # (moduli 2 and 3) cannot sit inside its hyperbolic sets
    assert sys3.index_count(1) == 0
    assert sys3.index_count(2) == 0
    assert sys3.index_count(4) > 0
    # degenerate ladder: at m=1 the exponent window closes entirely
    assert grid_size(1, 2, 0.01) == 0


def test_admissible_system_rejects_bad_tau():
    with pytest.raises(ValueError):
        admissible_system(LogPower(2), 0.5, m_max=8, k=3)


def test_index_count_matches_grid_size_when_feasible():
    sys2 = admissible_system(LogPower(2), 0.45, m_max=16, k=2)
    for m in range(6, 17):
        if sys2.index_count(m):
            assert sys2.index_count(m) == grid_size(m, 2, 0.45)


def test_grid_growth_exponent():
    for k, tau, target in [(2, 0.45, 1.0), (3, 0.3, 2.0)]:
        ms = [2 ** j for j in range(4, 11)]
        cs = [grid_size(m, k, tau) for m in ms]
        slope = np.polyfit(np.log(ms), np.log(cs), 1)[0]
        assert abs(slope - target) <= 0.2, (k, slope)


def test_shifted_system_boxes_inside_shifted_set():
    rng = np.random.default_rng(SEED)
    y = (0.37, 0.81)
    sys2 = admissible_system(LogPower(2), 0.2, m_max=9, k=2, y=y)
    n = 400
    thr = float(sys2.psi(n))
    for b in sys2.boxes_for(n):
        pts = b.sample(rng, 3000)
        assert membership_mask(pts, n, thr, y=y).all()


# ── star-shape property ──────────────────────────────────────────────────────

def test_property_P_zero_violations():
    rng = np.random.default_rng(SEED)
    for k, tau, n in [(2, 0.2, 350), (3, 0.01, 180)]:
        sysk = admissible_system(LogPower(2), tau, m_max=block_of(n), k=k)
        boxes = sysk.boxes_for(n)
        assert boxes
        assert verify_property_P(boxes, 4000, rng) == 0


def test_property_P_empty_cover_trivial():
    rng = np.random.default_rng(SEED)
    assert verify_property_P([], 100, rng) == 0


# ── serialization ────────────────────────────────────────────────────────────

def test_box_dict_roundtrip():
    rng = np.random.default_rng(SEED)
    for _ in range(10):
        b = random_box(rng, 3, int(rng.integers(2, 20)))
        assert box_from_dict(box_to_dict(b)) == b


@given(st.integers(2, 64), st.integers(1, 4))
@settings(max_examples=40)
def test_random_box_strict_window(n, k):
    rng = np.random.default_rng(n * 1000 + k)
    b = random_box(rng, k, n)
    assert b.in_strict_window()
    assert 0 < float(box_volume(b)) <= 1

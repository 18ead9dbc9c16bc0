from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

import oracles
from ergolab import (BudgetExceeded, DiscontinuityCertificate, HyperplaneSlice, PointSet, RectangleBoundary,
                     Rotation, SkewProductMap, StepRule, TorusPoint, condition_H_visit_frequency,
                     independence_falsifier, iterate, orbit, product_rotation, rotation_apply, rotation_power,
                     spt_apply, step_skew)
from ergolab.certificates import empty_certificate
from ergolab.dynamics import apply, is_resonant, orbit_array
from ergolab.torus import dist_array
from ergolab._kernels import map_points

SQRT2 = "sqrt(2)-1"


# -- rotations ---------------------------------------------------------------

def test_rotation_apply_example():
    assert rotation_apply(Rotation(["1/4"]), [0.9])[0] == pytest.approx(0.15, abs=1e-15)


def test_rotation_apply_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        rotation_apply(Rotation(["1/4"]), [0.1, 0.2])


def test_rotation_rejects_float_angles():
    with pytest.raises(TypeError):
        Rotation([0.25])


@pytest.mark.parametrize("x", [[0.0], [0.3], [0.999]])
def test_rotation_power_identity_and_period(x):
    R = Rotation(["1/4"])
    assert rotation_power(R, 0, x) == TorusPoint(tuple(x))
    assert rotation_power(R, 4, x)[0] == pytest.approx(x[0], abs=1e-15)
    assert rotation_power(R, 4_000_000, x)[0] == pytest.approx(x[0], abs=1e-15)


def test_rotation_power_cocycle():
    R = Rotation([SQRT2, "(1+sqrt(5))/2"])
    rng = np.random.default_rng(4)
    for _ in range(200):
        a, b = (int(v) for v in rng.integers(0, 10 ** 12, size=2))
        x = rng.random(2)
        lhs = rotation_power(R, a + b, x)
        rhs = rotation_power(R, b, rotation_power(R, a, x))
        assert dist_array(np.array([lhs.coords]), np.array([rhs.coords]))[0] <= 1e-10


def test_rotation_power_far_beyond_double_precision():
    R = Rotation([SQRT2])
    n = 3 ** 40
    want = mp.frac(mp.mpf("0.125") + n * oracles.SQRT2_M1)
    assert rotation_power(R, n, [0.125])[0] == pytest.approx(float(want), abs=1e-15)


def test_rotation_power_matches_high_precision():
    R = Rotation([SQRT2])
    for n in (1, 10, 10 ** 6, 10 ** 9, 2 ** 52 - 1):
        want = mp.frac(mp.mpf("0.3") + n * oracles.SQRT2_M1)
        got = rotation_power(R, n, [0.3])[0]
        assert abs(got - float(want)) <= 2e-16


def test_isometry_of_rotation_powers():
    R = Rotation([SQRT2, "sqrt(3)-1"])
    rng = np.random.default_rng(5)
    x, y = rng.random((50, 2)), rng.random((50, 2))
    before = dist_array(x, y)
    for m in (1, 7, 100, 1000):
        xm = np.array([rotation_power(R, m, p).coords for p in x])
        ym = np.array([rotation_power(R, m, p).coords for p in y])
        assert np.max(np.abs(dist_array(xm, ym) - before)) <= 1e-12


# -- orbits ------------------------------------------------------------------

def test_orbit_examples():
    R = Rotation(["1/3"])
    assert [p[0] for p in orbit(R, [0.0], 3)] == pytest.approx([0.0, 1 / 3, 2 / 3], abs=1e-15)
    assert list(orbit(R, [0.2], 1)) == [TorusPoint((0.2,))]
    ident = Rotation(["0"])
    assert list(orbit(ident, [0.7], 5)) == [TorusPoint((0.7,))] * 5


def test_orbit_rejects_empty_length():
    with pytest.raises(ValueError):
        list(orbit(Rotation(["1/3"]), [0.0], 0))


def test_orbit_consecutive_points_agree_with_map():
    for m in (Rotation([SQRT2]), product_rotation([SQRT2], ["1/7"]), step_skew([SQRT2], ["1/3"])):
        pts = orbit_array(m, np.full(m.dim, 0.37), 5000)
        stepped = map_points(m.pack(), pts[:-1])
        assert np.max(dist_array(stepped, pts[1:])) <= 1e-15


def test_orbit_matches_iterate():
    m = step_skew([SQRT2], ["1/3"])
    pts = orbit_array(m, [0.1, 0.2], 70_000)
    for n in (0, 1, 16_384, 65_536, 69_999):
        w, x = iterate(m, (TorusPoint((0.1,)), TorusPoint((0.2,))), n)
        assert w.coords + x.coords == tuple(pts[n])


def test_step_skew_fiber_against_visit_count_oracle():
    m = step_skew([SQRT2], ["1/3"])
    ns = [1, 10, 500, 3000]
    counts = oracles.box_counts(oracles.SQRT2_M1, "0.1", ns)
    for n, c in zip(ns, counts):
        want = mp.frac(mp.mpf("0.2") + mp.mpf(c) / 3)
        w, x = iterate(m, [0.1, 0.2], n)
        assert abs(x[0] - float(want)) <= 1e-15
        assert abs(w[0] - float(mp.frac(mp.mpf("0.1") + n * oracles.SQRT2_M1))) <= 1e-15


def test_spt_apply_examples():
    m = step_skew([SQRT2], ["1/3"])
    w, x = spt_apply(m, (TorusPoint((0.25,)), TorusPoint((0.5,))))
    assert x[0] == pytest.approx(0.5 + 1 / 3)
    w, x = spt_apply(m, (TorusPoint((0.5,)), TorusPoint((0.5,))))
    assert x[0] == 0.5
    assert w[0] == pytest.approx(2 ** 0.5 - 0.5, abs=1e-15)


def test_semiconjugacy_is_bitwise():
    rng = np.random.default_rng(6)
    pts = rng.random((10_000, 2))
    for m in (product_rotation([SQRT2], ["sqrt(3)-1"]), step_skew([SQRT2], ["1/3"])):
        moved = map_points(m.pack(), pts)
        base = map_points(m.base.pack(), pts[:, :1])
        assert np.array_equal(moved[:, :1], base)


def test_skew_product_validation():
    with pytest.raises(ValueError):
        SkewProductMap(Rotation([SQRT2]), ["1/3"], (StepRule((0.0, 0.0), (0.5, 1.0), ("1/3",)),))
    with pytest.raises(ValueError):
        StepRule((0.5,), (0.25,), ("1/3",))


def test_step_skew_certificate():
    m = step_skew([SQRT2], ["1/3"])
    assert m.base_certificate.distance([[0.49], [0.02], [0.25]]) == pytest.approx([0.01, 0.02, 0.25])
    # D = {0, 1/2} x X: distance ignores the fiber coordinate
    assert m.discontinuity.distance([[0.51, 0.3], [0.51, 0.9]]) == pytest.approx([0.01, 0.01])
    assert product_rotation([SQRT2], ["1/3"]).discontinuity.is_empty


def test_apply_accepts_every_point_form():
    m = product_rotation(["1/4"], ["1/8"])
    a = apply(m, (TorusPoint((0.5,)), TorusPoint((0.5,))))
    b = apply(m, [0.5, 0.5])
    assert a == b
    assert a[0][0] == 0.75 and a[1][0] == 0.625


# -- integer relations -------------------------------------------------------

def test_falsifier_examples():
    rel = independence_falsifier(["1/2"], 2)
    assert rel.k == (-1, 2) and rel.residual == 0.0
    assert independence_falsifier(["sqrt(2)"], 50) is None
    rel = independence_falsifier(["sqrt(2)", "1+sqrt(2)"], 2)
    assert rel.k == (1, 1, -1) and rel.residual == 0.0


def test_falsifier_complete_on_small_denominators():
    for q in range(1, 11):
        for p in range(0, q):
            rel = independence_falsifier([f"{p}/{q}"], 10)
            assert rel is not None
            assert Fraction(rel.k[0]) + rel.k[1] * Fraction(p, q) == 0
            assert any(rel.k[1:])


def test_falsifier_finds_mixed_relation():
    rel = independence_falsifier(["1/3", SQRT2], 3)
    assert rel is not None and rel.k[2] == 0


def test_falsifier_budget_reports_feasible_height(tight_budget):
    tight_budget(falsifier_vectors=1000)
    with pytest.raises(BudgetExceeded, match="height"):
        independence_falsifier([SQRT2, "sqrt(3)-1"], 10)


def test_is_resonant():
    assert is_resonant((2,), ["1/2"])
    assert not is_resonant((1,), [SQRT2])
    assert is_resonant((1, -1), ["sqrt(2)", "1+sqrt(2)"])


# -- condition (H) -----------------------------------------------------------

def test_visit_frequency_empty_certificate():
    assert condition_H_visit_frequency(product_rotation([SQRT2], ["1/3"]), [0.0], 1000, 0.1) == 0.0
    assert condition_H_visit_frequency(Rotation([SQRT2]), [0.0], 1000, 0.1) == 0.0


# [DERIVED] The mpmath simulation in tests/oracles.py counts 4001 of 10^5 base
# points within 0.01 of {0, 1/2} from base start 0.
def test_visit_frequency_step_skew():
    value = condition_H_visit_frequency(step_skew([SQRT2], ["1/3"]), [0.0], 100_000, 0.01)
    assert 0.02 <= value <= 0.06
    assert value == 4001 / 100_000


def test_visit_frequency_monotone_in_radius():
    m = step_skew([SQRT2], ["1/3"])
    values = [condition_H_visit_frequency(m, [0.3], 20_000, eps) for eps in (0.001, 0.01, 0.05, 0.2, 0.3)]
    assert values == sorted(values)
    assert values[-1] == 1.0


# -- certificates ------------------------------------------------------------

def test_certificate_pieces():
    assert PointSet(((0.1, 0.1),)).distance(np.array([[0.9, 0.2]])) == pytest.approx([0.2])
    assert HyperplaneSlice(1, 0.5).distance(np.array([[0.0, 0.45]])) == pytest.approx([0.05])
    box = RectangleBoundary((0.25, 0.25), (0.75, 0.75))
    assert box.distance(np.array([[0.5, 0.5], [0.5, 0.8], [0.9, 0.9]])) == pytest.approx([0.25, 0.05, 0.15])


def test_certificate_empty_and_union():
    e = empty_certificate(2)
    assert e.is_empty and np.isinf(e.distance([[0.1, 0.1]])[0])
    c = DiscontinuityCertificate(2, (HyperplaneSlice(0, 0.5),), "jump")
    u = e.union(c).union(c)
    assert u.pieces == c.pieces
    assert u.near([[0.49, 0.0], [0.2, 0.0]], 0.02).tolist() == [True, False]
    with pytest.raises(ValueError):
        c.union(empty_certificate(1))


def test_certificate_project_and_embed():
    c = DiscontinuityCertificate(1, (PointSet(((0.5,),)),), "jump")
    lifted = c.embed(2, (0,))
    assert lifted.distance([[0.5, 0.3]])[0] == 0.0
    assert lifted.project(1).distance([[0.45]])[0] == pytest.approx(0.05)
    fiber_plane = DiscontinuityCertificate(2, (HyperplaneSlice(1, 0.5),))
    with pytest.raises(ValueError):
        fiber_plane.project(1)
    with pytest.raises(ValueError):
        DiscontinuityCertificate(2, (RectangleBoundary((0, 0), (0.5, 0.5)),)).project(1)

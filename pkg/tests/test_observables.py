import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab import (BudgetExceeded, MixedObservable, Rotation, StepObservable, TrigPolynomial,
                     observable_from_dict)
from ergolab.exact import parse_scalar
from ergolab.observables import character_phase, evaluate, haar_integral
from ergolab.torus import haar_sample_array, wrap_array

SQRT2 = "sqrt(2)-1"
RNG_POINTS = np.random.default_rng(11).random((10_000, 2))


def random_trig(rng, dim=2, degree=3, size=5, real=False):
    table = {}
    for _ in range(size):
        k = tuple(int(v) for v in rng.integers(-degree, degree + 1, size=dim))
        c = complex(rng.normal(), rng.normal())
        table[k] = table.get(k, 0j) + c
    if real:
        sym = {}
        for k, c in table.items():
            neg = tuple(-v for v in k)
            if not any(k):
                sym[k] = complex(c.real)
            elif neg not in sym:
                sym[k], sym[neg] = c, c.conjugate()
        table = sym
    return TrigPolynomial(dim, table, real=real or None)


# -- evaluation --------------------------------------------------------------

def test_evaluation_examples():
    assert TrigPolynomial.cos((1,)).eval([0.25]) == pytest.approx(0.0, abs=1e-15)
    assert StepObservable.indicator((0,), (0.5,)).eval([0.5]) == 0.0
    assert StepObservable.indicator((0,), (0.5,)).eval([0.4999999]) == 1.0
    assert TrigPolynomial.constant(3, 2.5).eval([0.1, 0.2, 0.3]) == 2.5
    assert evaluate(TrigPolynomial.character((1,)), [0.25]) == pytest.approx(1j)


def test_evaluation_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        TrigPolynomial.cos((1,)).eval([0.1, 0.2])


def test_trig_values_match_direct_formula():
    rng = np.random.default_rng(12)
    f = random_trig(rng)
    direct = sum(c * np.exp(2j * np.pi * (RNG_POINTS @ np.array(k, dtype=float))) for k, c in f.coeffs.items())
    assert np.max(np.abs(f.values(RNG_POINTS) - direct)) <= 1e-12


def test_realness_flag_bounds_imaginary_part():
    rng = np.random.default_rng(13)
    observables = [random_trig(rng, real=True), TrigPolynomial.sin((2, -1)) * StepObservable.indicator((0, 0), (0.3, 1)),
                   TrigPolynomial.cos((1, 1)) + StepObservable.indicator((0.1, 0.2), (0.6, 0.9))]
    for f in observables:
        assert f.is_real
        assert np.max(np.abs(f.values(RNG_POINTS).imag)) <= 1e-13
        assert f.evaluate(RNG_POINTS).dtype == float


def test_real_constructor_rejects_nonconjugate_table():
    with pytest.raises(ValueError):
        TrigPolynomial(1, {(1,): 1.0}, real=True)
    with pytest.raises(ValueError):
        TrigPolynomial(1, {(0,): 1j}, real=True)


# -- exact integrals ---------------------------------------------------------

def test_haar_integral_examples():
    assert TrigPolynomial.character((3, -1)).haar_integral() == 0
    assert StepObservable.indicator((0, 0), (0.5, 0.5)).haar_integral() == pytest.approx(0.25)
    assert TrigPolynomial.constant(2, 1.75).haar_integral() == 1.75
    assert haar_integral(TrigPolynomial.cos((1,)) + 3) == 3.0


def test_step_fourier_integral_matches_quadrature():
    mp.mp.dps = 30
    lo, hi = 0.125, 0.7
    box = StepObservable.indicator((lo,), (hi,))
    for k in (-3, 1, 2, 5):
        want = complex(mp.quad(lambda t: mp.expj(2 * mp.pi * k * t), [lo, hi]))
        assert abs(box.fourier_integral((k,)) - want) <= 1e-14


def test_mixed_integral_matches_quadrature():
    f = TrigPolynomial.cos((1,)) * StepObservable.indicator((0.1,), (0.35,))
    want = math.sin(2 * math.pi * 0.35) / (2 * math.pi) - math.sin(2 * math.pi * 0.1) / (2 * math.pi)
    assert f.haar_integral() == pytest.approx(want, abs=1e-15)
    assert isinstance(f, MixedObservable)


def test_step_integral_against_monte_carlo():
    f = StepObservable(2, [((0, 0), (0.5, 0.25), 3.0), ((0.5, 0.5), (0.9, 1.0), -1.0)], default=0.5)
    pts = haar_sample_array(2, 100_000, 99)
    assert abs(f.evaluate(pts).mean() - f.haar_integral()) <= 0.01


def test_haar_integral_invariant_under_rotation():
    rng = np.random.default_rng(14)
    R = Rotation([SQRT2, "(1+sqrt(5))/2"])
    for _ in range(50):
        f = random_trig(rng, real=bool(rng.integers(2)))
        assert f.compose(R).haar_integral() == f.haar_integral()
    box = StepObservable.indicator((0.1, 0.2), (0.6, 0.9))
    assert box.compose(R).haar_integral() == pytest.approx(box.haar_integral(), abs=1e-15)


# -- algebra -----------------------------------------------------------------

def test_character_composed_with_rotation():
    R = Rotation([SQRT2])
    g = TrigPolynomial.character((3,)).compose(R)
    mp.mp.dps = 40
    phase = complex(mp.expj(6 * mp.pi * (mp.sqrt(2) - 1)))
    assert g.coefficient((3,)) == pytest.approx(phase, abs=1e-15)
    assert character_phase((3,), [parse_scalar(SQRT2)]) == pytest.approx(phase, abs=1e-15)


def test_character_phase_huge_frequency_is_exact():
    mp.mp.dps = 40
    k = 10 ** 12 + 7
    want = complex(mp.expj(2 * mp.pi * mp.frac(k * (mp.sqrt(2) - 1))))
    assert abs(character_phase((k,), [parse_scalar(SQRT2)]) - want) <= 1e-15


def test_union_support_and_character_product():
    a = TrigPolynomial(1, {(1,): 1.0, (2,): 2.0})
    b = TrigPolynomial(1, {(-3,): 0.5})
    assert set((a + b).coeffs) == {(1,), (2,), (-3,)}
    prod = TrigPolynomial.character((2, -1)) * TrigPolynomial.character((1, 4))
    assert prod.coeffs == {(3, 3): 1.0}


def test_frequency_budget(tight_budget):
    tight_budget(frequencies=20)
    a = TrigPolynomial(1, {(k,): 1.0 for k in range(5)})
    b = TrigPolynomial(1, {(10 * k,): 1.0 for k in range(5)})
    with pytest.raises(BudgetExceeded):
        a * b


def test_step_cell_budget(tight_budget):
    tight_budget(step_cells=3)
    cells = [((i / 10,), ((i + 1) / 10,), 1.0) for i in range(5)]
    with pytest.raises(BudgetExceeded):
        StepObservable(1, cells)


def test_step_rejects_overlap_and_bad_bounds():
    with pytest.raises(ValueError):
        StepObservable(1, [((0,), (0.5,), 1.0), ((0.4,), (0.8,), 2.0)])
    with pytest.raises(ValueError):
        StepObservable.indicator((0.5,), (0.5,))
    with pytest.raises(ValueError):
        StepObservable.indicator((0.2,), (1.5,))


def _random_observable(rng):
    trig = random_trig(rng, real=True)
    lo = rng.random(2) * 0.5
    box = StepObservable.indicator(lo, lo + 0.05 + rng.random(2) * 0.4)
    return [trig, box, trig * box, box + trig, box * box - 0.5 * box][int(rng.integers(5))]


def test_algebra_is_pointwise():
    rng = np.random.default_rng(15)
    for _ in range(40):
        f, g = _random_observable(rng), _random_observable(rng)
        fv, gv = f.values(RNG_POINTS), g.values(RNG_POINTS)
        assert np.max(np.abs((f + g).values(RNG_POINTS) - (fv + gv))) <= 1e-12
        assert np.max(np.abs((f * g).values(RNG_POINTS) - fv * gv)) <= 1e-12
        assert np.max(np.abs((f - 2.0 * g).values(RNG_POINTS) - (fv - 2 * gv))) <= 1e-12
        assert (f * g).sup_norm_bound >= np.max(np.abs(fv * gv)) - 1e-12


def test_compose_is_pointwise_shift():
    rng = np.random.default_rng(16)
    alpha = (math.sqrt(2) - 1, math.sqrt(3) - 1)
    R = Rotation([SQRT2, "sqrt(3)-1"])
    shifted = wrap_array(RNG_POINTS + np.array(alpha))
    for _ in range(20):
        f = _random_observable(rng)
        got = f.compose(R).values(RNG_POINTS)
        want = f.values(shifted)
        # boundary points could in principle round across a cell edge
        bad = np.abs(got - want) > 1e-12
        assert bad.mean() <= 1e-3


def test_embed_ignores_other_axes():
    f = TrigPolynomial.cos((1,)) + StepObservable.indicator((0.2,), (0.6,))
    g = f.embed(3, (1,))
    pts = np.random.default_rng(17).random((500, 3))
    assert np.allclose(g.values(pts), f.values(pts[:, 1:2]), atol=1e-14)
    assert g.haar_integral() == pytest.approx(f.haar_integral())


def test_discontinuity_certificates():
    box = StepObservable.indicator((0.2, 0.2), (0.6, 0.6))
    assert not box.discontinuity.is_empty
    assert box.discontinuity.distance([[0.21, 0.4]])[0] == pytest.approx(0.01)
    assert TrigPolynomial.cos((1, 1)).discontinuity.is_empty
    assert (0.0 * box + TrigPolynomial.cos((1, 0))).discontinuity.is_empty


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.999), st.floats(0.001, 0.5), st.floats(0, 0.999))
def test_indicator_half_open(lo, width, x):
    hi = min(lo + width, 1.0)
    f = StepObservable.indicator((lo,), (hi,))
    assert f.eval([x]) == (1.0 if lo <= x < hi else 0.0)


# -- config syntax -----------------------------------------------------------

def test_observable_from_dict():
    f = observable_from_dict({"kind": "trig", "terms": [{"k": [1], "c": [0, 0.5]}, {"k": [-1], "c": [0, -0.5]}]})
    assert f.is_real
    assert f.eval([0.25]) == pytest.approx(-1.0)
    g = observable_from_dict({"kind": "indicator", "lo": [0], "hi": ["1/2"], "axes": [1], "scale": 2}, dim=2)
    assert g.eval([0.9, 0.3]) == 2.0 and g.eval([0.3, 0.9]) == 0.0
    h = observable_from_dict({"kind": "product", "of": [{"kind": "cos", "k": [1, 0]},
                                                        {"kind": "constant", "value": 3}]}, dim=2)
    assert h.eval([0.0, 0.4]) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        observable_from_dict({"kind": "nope"})
    with pytest.raises(ValueError):
        observable_from_dict({"kind": "cos", "k": [1]}, dim=2)

import cmath
import json
import math

import numpy as np
import pytest

import oracles
from ergolab import (BudgetExceeded, Rotation, TrigPolynomial, double_average, kronecker_limit_oracle,
                     pointwise_convergence_test, product_limit_comparison, quadrature_limit_oracle,
                     rotation_power)
from ergolab.double_avg import (DoubleAverageSpec, MATCH, MISMATCH, character_pairs, default_points,
                                double_sums, min_lattice_size, nonresonant_constant)

SQRT2 = "sqrt(2)-1"
R1 = Rotation([SQRT2])
R2 = Rotation([SQRT2, "sqrt(3)-1"])


def e(k):
    return TrigPolynomial.character((k,))


def one(dim=1):
    return TrigPolynomial.constant(dim, 1.0)


def random_trig(rng, dim, degree=3, size=4):
    table = {}
    for _ in range(size):
        k = tuple(int(v) for v in rng.integers(-degree, degree + 1, size=dim))
        table[k] = complex(rng.normal(), rng.normal())
    return TrigPolynomial(dim, table)


def test_constant_pair_averages_to_one():
    for N in (1, 10, 1000):
        for x in ([0.0], [0.77]):
            assert double_average(R1, one(), one(), x, N) == 1


@pytest.mark.parametrize("k, j", [(1, 0), (2, -1), (-2, 1), (1, 1), (0, 2), (-1, 2)])
def test_double_average_matches_closed_form(k, j):
    for x in (0.0, 0.3, 0.91):
        for N in (1, 17, 10 ** 4, 10 ** 5):
            got = double_average(R1, e(k), e(j), [x], N)
            want = oracles.double_average(k, j, oracles.SQRT2_M1, str(x), N)
            assert abs(got - want) <= 1e-12


def test_kronecker_limit_examples():
    assert kronecker_limit_oracle(one(), one()).F.coeffs == {(0,): 1.0}
    lim = kronecker_limit_oracle(e(2), e(-1))
    assert lim.F.coeffs == {(1,): 1.0}
    assert lim.pairs == (((2,), (-1,), 1.0),)
    assert kronecker_limit_oracle(e(1), TrigPolynomial.constant(1, 3.0)).F.coeffs == {}


def test_quadrature_examples():
    assert quadrature_limit_oracle(TrigPolynomial.constant(1, 2.0), TrigPolynomial.constant(1, 1.5), [0.4], 1) == 3.0
    got = quadrature_limit_oracle(e(2), e(-1), [0.3], 16)
    assert abs(got - cmath.exp(2j * math.pi * 0.3)) <= 1e-14
    assert abs(quadrature_limit_oracle(e(1), e(1), [0.3], 16)) <= 1e-14


def test_quadrature_rejects_aliasing_lattice():
    f1, f2 = e(3), e(-2)
    assert min_lattice_size(f1, f2) == 8
    with pytest.raises(ValueError, match="need M >= 8"):
        quadrature_limit_oracle(f1, f2, [0.1], 7)


def test_oracles_agree_in_two_dimensions():
    rng = np.random.default_rng(41)
    for _ in range(10):
        f1, f2 = random_trig(rng, 2), random_trig(rng, 2)
        F = kronecker_limit_oracle(f1, f2).F
        M = min_lattice_size(f1, f2)
        for x in rng.random((20, 2)):
            assert abs(F.eval(x) - quadrature_limit_oracle(f1, f2, x, M)) <= 1e-10


def test_limit_comparison_examples():
    assert product_limit_comparison(e(2), one()).flag == MATCH
    assert product_limit_comparison(one(), e(-3)).flag == MATCH
    bad = product_limit_comparison(e(2), e(-1))
    assert bad.flag == MISMATCH and not bad.matches
    assert bad.product == 0 and bad.difference.coeffs == {(1,): 1.0}
    avoid = product_limit_comparison(TrigPolynomial(1, {(1,): 1.0, (3,): 2.0}), TrigPolynomial(1, {(1,): 1.0}))
    assert avoid.flag == MATCH
    assert json.dumps(bad.as_dict())


def test_bilinearity():
    rng = np.random.default_rng(42)
    x = [0.123]
    for _ in range(10):
        f, g, h = (random_trig(rng, 1) for _ in range(3))
        a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
        N = 3000
        lhs = double_average(R1, a * f + b * g, h, x, N)
        rhs = a * double_average(R1, f, h, x, N) + b * double_average(R1, g, h, x, N)
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))
        lhs = double_average(R1, h, a * f + b * g, x, N)
        rhs = a * double_average(R1, h, f, x, N) + b * double_average(R1, h, g, x, N)
        assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_shift_compatibility_split():
    # A_N(R^m x) reindexes to the sum over n in [m, N + m) of f1(x + n a) f2(x + 2n a - m a).
    # Dropping the 2m boundary terms and comparing f2 with its translate gives
    # |A_N(R^m x) - A_N(x)| <= (2m / N) |f1| |f2| + |f1| sup |f2(. - m a) - f2|.
    rng = np.random.default_rng(43)
    alpha = math.sqrt(2) - 1
    for (k,), (j,) in character_pairs(1, 2):
        f1, f2 = e(k), e(j)
        for _ in range(5):
            x = float(rng.random())
            m = int(rng.integers(1, 50))
            N = int(rng.integers(100, 5000))
            shifted = rotation_power(R1, m, [x]).coords
            lhs = abs(double_average(R1, f1, f2, shifted, N) - double_average(R1, f1, f2, [x], N))
            variation = abs(cmath.exp(-2j * math.pi * j * m * alpha) - 1)
            assert lhs <= 2 * m / N + variation + 1e-12


def test_nonresonant_constant():
    f1 = TrigPolynomial(1, {(1,): 0.5, (2,): 1.0})
    f2 = TrigPolynomial(1, {(-1,): 2.0, (1,): 0.25})
    want = sum(abs(c * d) * oracles.pair_constant(k[0], j[0], oracles.SQRT2_M1)
               for k, c in f1.coeffs.items() for j, d in f2.coeffs.items())
    assert nonresonant_constant(R1, f1, f2) == pytest.approx(want, rel=1e-12)
    assert nonresonant_constant(Rotation(["1/3"]), e(3), one()) == math.inf


def test_everywhere_convergence_on_random_specs():
    rng = np.random.default_rng(44)
    for dim, R in ((1, R1), (2, R2)):
        points = default_points(dim, seed=3)
        for _ in range(3):
            f1, f2 = random_trig(rng, dim, 2), random_trig(rng, dim, 2)
            report = pointwise_convergence_test(DoubleAverageSpec(R, f1, f2, points, (10, 100, 1000, 10000)))
            assert report.passed
            assert np.all(report.max_error <= report.bounds + 1e-10)


def test_default_points():
    assert default_points(1, 0).shape == (110, 1)
    assert default_points(2, 0).shape == (110, 2)
    assert np.array_equal(default_points(2, 5), default_points(2, 5))


def test_convergence_test_rejects_resonant_angles():
    spec = DoubleAverageSpec(Rotation(["1/2"]), e(1), e(1), default_points(1), (10,))
    with pytest.raises(ValueError, match="integer relation"):
        pointwise_convergence_test(spec)


def test_spec_validation():
    with pytest.raises(ValueError):
        DoubleAverageSpec(R2, e(1), e(1), [[0.1]], (10,))
    with pytest.raises(ValueError):
        DoubleAverageSpec(R1, e(1), e(1), [[0.1]], (10, 10))
    with pytest.raises(TypeError):
        double_average(R1, e(1), object(), [0.1], 10)


def test_double_sum_budget(tight_budget):
    tight_budget(orbit_steps=1000)
    with pytest.raises(BudgetExceeded):
        double_sums(R1, e(1), e(1), np.zeros((10, 1)), [100])


def test_report_is_json_ready():
    spec = DoubleAverageSpec(R1, e(2), e(-1), default_points(1)[:4], (10, 100))
    report = pointwise_convergence_test(spec)
    data = report.as_dict()
    assert json.dumps(data)
    assert data["limit_comparison"]["flag"] == MISMATCH
    assert all(row["error"] <= 1e-12 for row in data["errors"])

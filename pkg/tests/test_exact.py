from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergolab import ExactScalar, parse_scalar

mp.mp.dps = 50


def test_sqrt_squared_is_exactly_two():
    r = parse_scalar("sqrt(2)")
    assert r * r == ExactScalar(2)
    assert (r * r).is_rational


@pytest.mark.parametrize("text, value", [
    ("1/3", mp.mpf(1) / 3),
    ("sqrt(2)-1", mp.sqrt(2) - 1),
    ("(1+sqrt(5))/2", (1 + mp.sqrt(5)) / 2),
    ("(3-2*sqrt(7))/5", (3 - 2 * mp.sqrt(7)) / 5),
    ("-4/6", mp.mpf(-2) / 3),
    ("sqrt(8)", 2 * mp.sqrt(2)),
    ("2*sqrt(3)", 2 * mp.sqrt(3)),
])
def test_parse_and_round(text, value):
    x = parse_scalar(text)
    assert float(x) == float(value)
    hi, lo = x.to_dd()
    assert abs(mp.mpf(hi) + mp.mpf(lo) - value) <= mp.mpf(2) ** -100


@pytest.mark.parametrize("text", ["", "1/0", "sqrt(2", "sqrt(-2)", "1.5", "1/3x", "sqrt(2)+sqrt(3)"])
def test_parse_rejects(text):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_scalar(text)


def test_str_round_trips():
    for text in ["1/3", "sqrt(2)-1", "(1+sqrt(5))/2", "-7", "(3-2*sqrt(7))/5"]:
        x = parse_scalar(text)
        assert parse_scalar(str(x)) == x


def test_frac_and_floor():
    x = parse_scalar("3+sqrt(2)")
    assert x.__floor__() == 4
    assert x.frac() == parse_scalar("sqrt(2)-1")
    assert parse_scalar("-1/3").frac() == ExactScalar(Fraction(2, 3))


def test_floats_are_not_exact():
    with pytest.raises(TypeError):
        ExactScalar.coerce(0.5)


def test_mixed_radicands_rejected():
    with pytest.raises(ValueError):
        parse_scalar("sqrt(2)") + parse_scalar("sqrt(3)")


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 30), st.sampled_from([2, 3, 5, 6, 7]))
def test_field_arithmetic_matches_mpmath(a, b, c, d):
    x = ExactScalar.quadratic(a, b, d, c)
    y = ExactScalar.quadratic(b, 1, d, 3)
    xv = (a + b * mp.sqrt(d)) / c
    yv = (b + mp.sqrt(d)) / 3
    assert abs(mp.mpf(float(x + y)) - (xv + yv)) <= 1e-12 * (1 + abs(xv + yv))
    assert abs(mp.mpf(float(x * y)) - xv * yv) <= 1e-12 * (1 + abs(xv * yv))
    assert (x < y) == (xv < yv)
    if x != ExactScalar(0):
        assert x * x.inverse() == ExactScalar(1)

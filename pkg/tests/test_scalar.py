from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarber.scalar import (
    FLOAT,
    compare,
    convert,
    format_scalar,
    from_decimal_string,
    parse_scalar,
    to_decimal,
    to_decimal_directed,
)

fractions = st.fractions(max_denominator=10**6)


@pytest.mark.parametrize(
    "text, value",
    [
        ("0.11", Fraction(11, 100)),
        ("0", Fraction(0)),
        ("0.78", Fraction(39, 50)),
        ("-1.5e-3", Fraction(-3, 2000)),
        ("+2E2", Fraction(200)),
        (".5", Fraction(1, 2)),
    ],
)
def test_from_decimal_string_exact(text, value):
    got = from_decimal_string(text)
    assert got == value and isinstance(got, Fraction)


def test_from_decimal_string_lowest_terms():
    q = from_decimal_string("0.250")
    assert (q.numerator, q.denominator) == (1, 4)


@pytest.mark.parametrize("text", ["", "abc", "1.2.3", "1e", "--1", "0x10", "inf", "nan"])
def test_from_decimal_string_rejects(text):
    with pytest.raises(ValueError):
        from_decimal_string(text)


def test_float_backend():
    assert from_decimal_string("0.11", FLOAT) == 0.11
    assert convert(Fraction(1, 4), FLOAT) == 0.25
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert format_scalar(Fraction(3, 4)) == "3/4"
    assert parse_scalar(format_scalar(Fraction(-7, 9))) == Fraction(-7, 9)


def test_to_decimal_examples():
    assert to_decimal(Fraction(1, 3), 4, "round_up") == "3.334e-1"
    assert to_decimal(Fraction(1, 3), 4, "truncate") == "3.333e-1"
    assert to_decimal(0, 4, "round_up") == "0"
    assert to_decimal(Fraction(-1, 3), 4, "round_up") == "-3.334e-1"
    assert to_decimal(Fraction(9999, 1000), 3, "round_up") == "1.00e1"
    assert to_decimal(Fraction(1), 1, "truncate") == "1e0"


def test_to_decimal_half_of_power():
    # 0.78**128 / 2 = 7.7105...e-15: four digits truncate to 7.710 and round up to 7.711.
    x = Fraction(39, 50) ** 128 / 2
    assert to_decimal(x, 4, "truncate") == "7.710e-15"
    assert to_decimal(x, 4, "round_up") == "7.711e-15"
    # Rounding the signed value -x toward +inf keeps the displayed magnitude at 7.710.
    assert to_decimal_directed(-x, 4, "up") == "-7.710e-15"
    assert to_decimal_directed(-x, 4, "down") == "-7.711e-15"


def test_to_decimal_rejects_bad_args():
    with pytest.raises(ValueError):
        to_decimal(Fraction(1, 3), 0)
    with pytest.raises(ValueError):
        to_decimal(Fraction(1, 3), 3, "sideways")


def test_compare_examples():
    assert compare(Fraction(1, 3), Fraction(33, 100)) == 1
    assert compare(Fraction(39, 50), Fraction(39, 50)) == 0
    assert compare(Fraction(0), Fraction(1)) == -1
    with pytest.raises(TypeError):
        compare(Fraction(1, 2), 0.5)


@given(fractions, fractions, fractions)
def test_compare_is_a_total_order(a, b, c):
    assert compare(a, b) == -compare(b, a)
    if compare(a, b) <= 0 and compare(b, c) <= 0:
        assert compare(a, c) <= 0


@settings(max_examples=500)
@given(st.fractions(min_value=0, max_value=10**9, max_denominator=10**9), st.integers(1, 12))
def test_directed_rendering_brackets_value(x, k):
    hi = parse_scalar(to_decimal(x, k, "round_up"))
    lo = parse_scalar(to_decimal(x, k, "truncate"))
    assert lo <= x <= hi


@settings(max_examples=10_000)
@given(fractions, fractions)
def test_exact_arithmetic_round_trip(a, b):
    assert (a + b) - b == a

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nicd.exact import (
    RationalPoly,
    bernstein_basis,
    exact_decimal,
    fixed_decimal,
    isqrt_upper,
    parse_rational,
    poly_eval,
    rat,
    rational_from_json,
    rational_to_json,
    render_decimal,
    significant_decimal,
)

fractions = st.fractions(max_denominator=10**6).filter(lambda x: abs(x) < 10**6)
polys = st.lists(fractions, max_size=6).map(RationalPoly)


def test_rat_reduces_and_rejects_zero_denominator():
    assert rat(-4, 8) == Fraction(-1, 2)
    assert rat(3, -6).denominator == 2
    with pytest.raises(ZeroDivisionError):
        rat(1, 0)


@pytest.mark.parametrize("text, value", [("2/5", Fraction(2, 5)), ("0.40", Fraction(2, 5)), (" 7 ", Fraction(7)), ("1e-3", Fraction(1, 1000))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


def test_parse_rational_rejects_floats_and_garbage():
    with pytest.raises(TypeError):
        parse_rational(0.4)
    with pytest.raises(ValueError):
        parse_rational("two fifths")
    with pytest.raises(ValueError):
        parse_rational("1/0")


@given(fractions)
def test_json_round_trip(r):
    assert rational_from_json(rational_to_json(r)) == r


def test_decimal_rendering():
    assert exact_decimal(Fraction(2689, 6250)) == "0.43024"
    assert exact_decimal(Fraction(-3, 2500)) == "-0.0012"
    assert exact_decimal(Fraction(5)) == "5"
    with pytest.raises(ValueError):
        exact_decimal(Fraction(1, 3))
    assert render_decimal(Fraction(1, 3), 5) == "0.33333 (approx)"
    assert significant_decimal(Fraction(2, 3), 4) == "0.6667"


def test_fixed_decimal():
    assert fixed_decimal(Fraction(1, 3), 4) == "0.3333"
    assert fixed_decimal(Fraction(-1, 3), 4) == "-0.3333"
    assert fixed_decimal(Fraction(1, 8), 2) == "0.12"  # half-even
    assert fixed_decimal(Fraction(3, 8), 2) == "0.38"
    assert fixed_decimal(Fraction(0), 3) == "0.000"
    assert fixed_decimal(Fraction(7, 2), 0) == "4"


def test_poly_basics():
    p = RationalPoly([0, 1])
    q = RationalPoly.one_minus_p()
    assert (p + q) == [1]
    assert (p * q) == [0, 1, -1]
    assert RationalPoly([1, 2, 0, 0]).degree == 1
    assert RationalPoly().degree == -1
    assert str(RationalPoly([0, Fraction(7, 4), Fraction(-11, 4), 0, 0, 1])) == "7/4*p - 11/4*p^2 + p^5"
    assert str(RationalPoly([-1, -1])) == "-1 - p"
    assert str(RationalPoly()) == "0"
    assert RationalPoly.from_json(RationalPoly([1, Fraction(1, 2)]).to_json()) == [1, Fraction(1, 2)]


@given(polys, polys, fractions)
def test_ring_homomorphism(a, b, x):
    assert poly_eval(a + b, x) == a(x) + b(x)
    assert poly_eval(a * b, x) == a(x) * b(x)
    assert poly_eval(a - b, x) == a(x) - b(x)


@given(st.integers(0, 6), st.fractions(0, 1, max_denominator=100))
def test_bernstein_partition_of_unity(n, x):
    from math import comb

    total = sum(comb(n, k) * bernstein_basis(n, k)(x) for k in range(n + 1))
    assert total == 1


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7, 10**6 + 3])
def test_isqrt_upper_is_certified(n):
    r = isqrt_upper(n)
    assert r * r >= n
    below = r - Fraction(1, 10**6)
    assert below * below < n

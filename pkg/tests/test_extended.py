from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from radembed.extended import INF, NEG_INF, ONE, ZERO, ExtendedRational, ExtendedRationalError, emax, emin, ext

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)


def test_parse_and_print_round_trip():
    for text in ("3/4", "-7/2", "0", "inf", "-inf", "12"):
        assert str(ext(text)) == str(ExtendedRational(text))
        assert ext(str(ext(text))) == ext(text)


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        ExtendedRational(0.5)
    with pytest.raises(TypeError):
        ExtendedRational(True)


def test_indeterminate_forms_raise():
    with pytest.raises(ExtendedRationalError):
        INF - INF
    with pytest.raises(ExtendedRationalError):
        ZERO * INF


def test_infinity_ordering():
    assert NEG_INF < ext(-10**9) < ZERO < ext(10**9) < INF
    assert emax(1, "5/2", NEG_INF) == ext("5/2")
    assert emin(INF, 3, "-1/3") == ext("-1/3")


@given(fractions, fractions)
def test_arithmetic_matches_fraction(a, b):
    x, y = ext(a), ext(b)
    assert x + y == ext(a + b)
    assert x - y == ext(a - b)
    assert x * y == ext(a * b)
    if b != 0:
        assert x / y == ext(a / b)
    assert (x < y) == (a < b)


@given(fractions)
def test_infinity_absorbs_finite_values(a):
    assert INF + a == INF
    assert NEG_INF + a == NEG_INF
    if a > 0:
        assert INF * a == INF
    if a < 0:
        assert INF * a == NEG_INF
    assert ONE * a == ext(a)
    assert ext(a).fraction == Fraction(a)

from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from radembed.exponents import DomainError
from radembed.examples import (example_3_1, example_3_2, example_3_3, example_3_4, example_3_5,
                               example_4_2, run_example)


@pytest.mark.parametrize("a", [F(-1), F(0), F(1, 2), F(1), F(3, 2), F(2)])
def test_inverse_power_family(a):
    out = example_3_1(a=a)
    assert out["match"], out["computed"]


def test_inverse_power_values():
    assert example_3_1(a=1)["computed"]["qset"] == "(10/3, 6)"
    out = example_3_1(a=2)
    assert out["computed"]["kind"] == "sum"
    assert out["computed"]["q1set"] == "(1, 4)" and out["computed"]["q2set"] == "(4, inf)"


@pytest.mark.parametrize("d", [F(-2), F(-1), F(0), F(3)])
def test_zero_potential_family(d):
    assert example_3_2(d=d)["match"]


@pytest.mark.parametrize("variant", ["K1", "K2"])
@pytest.mark.parametrize("d", [F(-1), F(0), F(2)])
def test_exponential_decay_family(variant, d):
    assert example_3_3(d=d, variant=variant)["match"]


@pytest.mark.parametrize("variant", ["V", "V1", "V2"])
@pytest.mark.parametrize("b", [F(1, 4), F(1, 2), F(1)])
def test_exponential_growth_family(variant, b):
    assert example_3_4(b=b, variant=variant)["match"]


def test_growth_family_values():
    assert example_3_4(b=F(1, 2))["computed"]["qset"] == "(2, inf)"
    assert example_3_4(b=1, variant="V1")["computed"]["qset"] == "(6, inf)"
    assert example_3_4(b=F(1, 4), variant="V2")["computed"]["qset"] == "(1, inf)"


def test_strongly_singular_power():
    out = example_3_5()
    assert out["match"] and out["wider_than_prior"] in (True, None)
    assert out["comparison"]["b1"] == "-23/8"


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=F(-39, 10), max_value=F(-31, 10), max_denominator=20),
       st.fractions(min_value=-3, max_value=0, max_denominator=20),
       st.fractions(min_value=-3, max_value=0, max_denominator=20))
def test_strongly_singular_family(a, b, b0):
    if b0 <= a:
        return
    out = example_3_5(a=a, b=b, b0=b0)
    assert out["match"], (out["stated"], out["computed"])


def test_double_power_example_routes():
    out = example_4_2(q=F(3, 2))
    assert out["match"] and out["route"] == "minimization"
    assert example_4_2(q=4)["route"] == "mountain_pass"
    assert example_4_2(q=20)["route"] is None
    fb = example_4_2(b0=-1, b=3)
    assert fb["fallback"]["message"] == "no single-space range; sum-space only"


def test_condition_violations():
    with pytest.raises(DomainError, match="condition"):
        example_3_1(a=3)
    with pytest.raises(DomainError):
        example_3_4(b=2)
    with pytest.raises(DomainError):
        run_example("9.9")

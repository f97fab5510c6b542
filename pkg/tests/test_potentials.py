from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import integrate

from radembed.exponents import Side
from radembed.potentials import PotentialParseError, PotentialSpec, Term, dominant_term, parse_potential


def test_parse_simple_forms():
    V = parse_potential("r^-2")
    assert V.pieces[0].terms == (Term(F(1), F(-2)),)
    K = parse_potential("exp(-3r)*r^2")
    assert K.pieces[0].terms == (Term(F(1), F(2), F(-3)),)
    W = parse_potential("2/3*exp(1/r) + r^-1")
    assert set(W.pieces[0].terms) == {Term(F(2, 3), F(0), F(0), F(1)), Term(F(1), F(-1))}


def test_parse_piecewise_and_asym():
    V = parse_potential("piecewise[(0,1): r^-1; (1,inf): 0]")
    assert len(V.pieces) == 2 and V.pieces[1].is_zero and V.zero_outside
    A = parse_potential("asym[0: exp(1/r); inf: r^3]")
    assert A.end_terms(Side.ORIGIN) == (Term(F(1), F(0), F(0), F(1)),)
    assert A.end_terms(Side.INFINITY) == (Term(F(1), F(3)),)


@pytest.mark.parametrize("text", ["r^", "exp(2)", "piecewise[(0,1): r^-1]", "r^-1 +", "r^(1/0)", "q^2"])
def test_parse_errors_point_at_position(text):
    with pytest.raises(PotentialParseError) as err:
        parse_potential(text)
    assert 0 <= err.value.position <= len(text)
    assert "^" in str(err.value)


def test_evaluation_matches_closed_form():
    r = np.geomspace(1e-3, 50, 40)
    V = parse_potential("exp(-3r)*r^2 + 1/2*r^-1")
    np.testing.assert_allclose(V(r), np.exp(-3 * r) * r ** 2 + 0.5 / r, rtol=1e-13)
    P = parse_potential("piecewise[(0,1): r^-1; (1,inf): r^-5/2]")
    np.testing.assert_allclose(P(r), np.where(r <= 1, 1 / r, r ** -2.5), rtol=1e-13)


def test_dominant_terms():
    terms = (Term(F(1), F(-1)), Term(F(1), F(2)), Term(F(1), F(0), F(-1)))
    assert dominant_term(terms, Side.ORIGIN) == Term(F(1), F(-1))
    assert dominant_term(terms, Side.INFINITY) == Term(F(1), F(2))


def test_moment_near_zero_against_quad():
    K = parse_potential("piecewise[(0,1/2): r^-1 + exp(-2r); (1/2,inf): r^-3]")
    for r0 in (0.1, 0.5, 0.9):
        want, _ = integrate.quad(lambda r: float(K(np.array(r))) * r ** 2, 0, r0, limit=200, points=[0.5])
        assert K.moment_near_zero(r0, 3) == pytest.approx(want, rel=1e-9)
    assert math.isinf(parse_potential("r^-3").moment_near_zero(0.1, 3))
    assert math.isinf(parse_potential("exp(1/r)").moment_near_zero(0.1, 3))


def test_scaling_and_validation():
    K = parse_potential("r^-1").scaled(F(5, 2))
    assert K.pieces[0].terms[0].c == F(5, 2)
    with pytest.raises(ValueError):
        K.scaled(0)
    assert PotentialSpec.zero().is_zero_near(Side.ORIGIN)

from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from radembed.catalog import CatalogError, analyze_end, best_ranges, is_K_L1_ball, is_K_L1_global
from radembed.exponents import AsymptoticProfile, ExponentSet, ProblemDims, Side, q1_set_origin_with_gamma
from radembed.extended import INF, NEG_INF, ext
from radembed.potentials import PotentialSpec, parse_potential

D23 = ProblemDims(2, 3)


def ranges(V, K, dims=D23, **kw):
    return best_ranges(parse_potential(V), parse_potential(K), dims, **kw).conclusion


def test_inverse_power_pair_single_space():
    c = ranges("r^-1", "r^0")
    assert c.kind == "single" and c.qset == ExponentSet(F(10, 3), 6)


def test_critical_power_pair_sum_space():
    c = ranges("r^-2", "r^-1")
    assert c.kind == "sum"
    assert c.q1set == ExponentSet(1, 4) and c.q2set == ExponentSet(4, INF)


def test_zero_potential():
    c = ranges("0", "r^0")
    assert c.kind == "sum" and c.q1set == ExponentSet(1, 6) and c.q2set == ExponentSet(6, INF)


def test_exponential_potentials():
    c = ranges("exp(1/r)", "exp(1/2/r)")
    assert c.kind == "single" and c.qset == ExponentSet(2, INF)
    c = ranges("exp(-1r)", "exp(-1r)")
    assert c.kind == "single" and c.qset == ExponentSet(1, 6)


def test_unbounded_ratio_reports_none():
    c = ranges("r^0", "exp(1r)")
    assert c.kind == "none" and any("infinity" in d for d in c.diagnostics)


def test_gamma_best_values():
    cand = analyze_end(parse_potential("r^-3"), parse_potential("r^0"), Side.ORIGIN, D23)
    assert cand.gamma_best == 3
    cand = analyze_end(parse_potential("exp(1/r)"), parse_potential("r^0"), Side.ORIGIN, D23)
    assert cand.gamma_best == INF
    cand = analyze_end(parse_potential("exp(1r)"), parse_potential("r^0"), Side.INFINITY, D23)
    assert cand.gamma_best == NEG_INF
    cand = analyze_end(parse_potential("r^-1"), parse_potential("r^0"), Side.ORIGIN, D23)
    assert cand.gamma_best is None


def test_K_must_be_positive_near_ends():
    with pytest.raises(CatalogError):
        best_ranges(parse_potential("r^0"), parse_potential("piecewise[(0,1): r^0; (1,inf): 0]"), D23)


def test_integrability():
    assert is_K_L1_ball(parse_potential("r^-2"), D23)
    assert not is_K_L1_ball(parse_potential("r^-3"), D23)
    assert is_K_L1_global(parse_potential("exp(-1r)*r^-1"), D23)
    assert not is_K_L1_global(parse_potential("r^-3"), D23)
    assert is_K_L1_global(parse_potential("piecewise[(0,1): r^-1; (1,inf): r^-5/2]"), ProblemDims(2, 3)) is False
    assert is_K_L1_global(parse_potential("piecewise[(0,1): r^-1; (1,inf): r^-7/2]"), D23)


def test_grid_check_agrees_with_exact_search():
    V = parse_potential("r^-1 + exp(-1r)")
    K = parse_potential("r^-1/2*exp(-1/2*r)")
    exact = best_ranges(V, K, D23).conclusion
    checked = best_ranges(V, K, D23, verify_grid=32)
    assert checked.conclusion == exact
    assert "grid check" in checked.beta_search


powers = st.fractions(min_value=-4, max_value=4, max_denominator=12)


@settings(max_examples=60, deadline=None)
@given(powers, powers, st.fractions(min_value=F(1, 10), max_value=50, max_denominator=10))
def test_scaling_K_changes_nothing(a, b, c):
    V, K = PotentialSpec.power(a), PotentialSpec.power(b)
    try:
        base = best_ranges(V, K, D23).conclusion
    except CatalogError:
        return
    scaled = best_ranges(V, K.scaled(c), D23).conclusion
    assert (scaled.q1set, scaled.q2set, scaled.qset) == (base.q1set, base.q2set, base.qset)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=2, max_value=8, max_denominator=8), powers,
       st.fractions(min_value=0, max_value=1, max_denominator=16))
def test_smaller_gamma_gives_smaller_origin_range(g, b, t):
    V, K = PotentialSpec.power(-g), PotentialSpec.power(b)
    report = best_ranges(V, K, D23)
    assert report.origin.candidates.gamma_best == g
    best = report.origin.best
    gamma = 2 + (g - 2) * t
    for beta in (F(0), F(1, 3), F(1)):
        alpha = report.origin.candidates.alpha_bound(beta)
        if alpha is None or not alpha.is_finite:
            continue
        sub = q1_set_origin_with_gamma(AsymptoticProfile(Side.ORIGIN, alpha, beta, gamma), D23)
        if not sub.is_empty:
            assert best.lower <= sub.lower and sub.upper <= best.upper

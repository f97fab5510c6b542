from __future__ import annotations

import math

import numpy as np
import pytest

from radembed.estimator import (TabulatedPotential, classify, decay_report, estimate_S0, estimate_Sinf,
                                load_tabulated, witness_value)
from radembed.exponents import Side
from radembed.grid import RadialGrid, w_norm
from radembed.potentials import parse_potential

V = parse_potential("r^-1")
K = parse_potential("r^0")
GRID = RadialGrid.log_spaced(1e-4, 1e3, 192)


@pytest.mark.parametrize("side", [Side.ORIGIN, Side.INFINITY])
def test_witness_is_feasible_and_attains_value(side):
    est = (estimate_S0 if side is Side.ORIGIN else estimate_Sinf)(4, 1.0, V, K, GRID)
    assert est.converged and est.value > 0
    assert w_norm(est.witness, V) == pytest.approx(1.0, abs=1e-8)
    assert witness_value(est, V, K) == pytest.approx(est.value, rel=1e-9)


def test_estimates_are_monotone_and_decay():
    Rs = [1, 0.5, 0.25, 0.125]
    (row,) = decay_report([4], Rs, Side.ORIGIN, V, K, GRID)
    vals = [e.value for e in row.estimates]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert row.classification == "decaying" and row.slope < -0.1
    (row,) = decay_report([4], [1, 2, 4, 8], Side.INFINITY, V, K, GRID)
    vals = [e.value for e in row.estimates]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert row.classification == "decaying"


def test_schedule_must_be_geometric():
    with pytest.raises(ValueError):
        decay_report([4], [1, 0.3, 0.1], Side.ORIGIN, V, K, GRID)
    with pytest.raises(ValueError):
        decay_report([4], [1], Side.ORIGIN, V, K, GRID)


def test_input_validation():
    with pytest.raises(ValueError):
        estimate_S0(1, 1.0, V, K, GRID)
    with pytest.raises(ValueError):
        estimate_S0(4, 1e5, V, K, GRID)


def test_classification_thresholds():
    assert classify(-0.5) == "decaying"
    assert classify(0.05) == "plateau"
    assert classify(-0.1) == "plateau"
    assert classify(0.3) == "diverging"


def test_proven_range_note():
    (row,) = decay_report([4], [1, 0.5], Side.ORIGIN, V, K, GRID, proven=lambda q: 10 / 3 < q < 6)
    assert row.to_dict()["range_note"] == "inside proven range"


def test_tabulated_potentials_match_symbolic(tmp_path):
    r = np.geomspace(1e-5, 2e3, 400)
    path = tmp_path / "table.csv"
    lines = ["r,V,K"] + [f"{float(x)!r},{float(1 / x)!r},1.0" for x in r]
    path.write_text("\n".join(lines) + "\n")
    Vt, Kt = load_tabulated(str(path))
    assert isinstance(Vt, TabulatedPotential)
    a = estimate_S0(4, 0.5, V, K, GRID)
    b = estimate_S0(4, 0.5, Vt, Kt, GRID)
    assert b.value == pytest.approx(a.value, rel=1e-3)


def test_tabulated_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("r,V,K\n1,2,3\nx,1,1\n")
    with pytest.raises(ValueError, match="line 3|:3:"):
        load_tabulated(str(path))
    with pytest.raises(ValueError):
        TabulatedPotential([1, 0.5], [1, 1])
    with pytest.raises(ValueError):
        TabulatedPotential([1, 2], [1, -1])


def test_non_integrable_K_blows_up_under_refinement():
    Vz, Kb = parse_potential("r^0"), parse_potential("r^-5")
    coarse = estimate_S0(4, 1.0, Vz, Kb, RadialGrid.log_spaced(1e-3, 1e3, 192))
    fine = estimate_S0(4, 1.0, Vz, Kb, RadialGrid.log_spaced(1e-4, 1e3, 192))
    assert fine.value > 100 * coarse.value

"""Empirical lower bounds for the localized embedding suprema.

``S0(q, R)`` is the supremum of ``int_{B_R} K |u|^q dx`` over radial ``u``
with ``||u|| = 1``; ``Sinf(q, R)`` integrates over the complement of ``B_R``
instead. Both are estimated by ascent on the discrete unit sphere, so every
reported value is attained by a stored witness and bounds the discrete
supremum from below. Nothing here certifies compactness; reports are
labelled empirical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .exponents import Side
from .grid import Discretization, RadialFunction, RadialGrid, restrict_bands

REL_TOL = 1e-7
DECAY_SLOPE = 0.1


@dataclass(frozen=True)
class SupremumEstimate:
    side: Side
    q: float
    R: float
    value: float
    iterations: int
    converged: bool
    witness: Optional[RadialFunction] = field(default=None, compare=False, repr=False)
    diverged: bool = False

    def to_row(self) -> dict:
        return {"side": self.side.value, "q": self.q, "R": self.R, "estimate": self.value,
                "converged": self.converged, "diverged": self.diverged, "iterations": self.iterations}


class TabulatedPotential:
    """Linear interpolation of tabulated values in ``log r``; constant beyond the table."""

    def __init__(self, r, values):
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.shape != values.shape:
            raise ValueError("a table needs at least two (r, value) rows")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("tabulated r must be positive and strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("tabulated values must be finite and nonnegative")
        self.log_r = np.log(r)
        self.values = values

    def __call__(self, r) -> np.ndarray:
        return np.interp(np.log(np.asarray(r, dtype=float)), self.log_r, self.values)


def load_tabulated(path: str):
    """Read ``r, V, K`` columns (header optional) into two tabulated potentials."""
    rows = []
    with open(path, newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in row[:3]])
            except ValueError:
                if line_no == 1:
                    continue
                raise ValueError(f"{path}:{line_no}: expected three numbers, got {row!r}")
            if len(rows[-1]) != 3:
                raise ValueError(f"{path}:{line_no}: expected three columns")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    return TabulatedPotential(data[:, 0], data[:, 1]), TabulatedPotential(data[:, 0], data[:, 2])


# ---------------------------------------------------------------------------
# the ascent

class _Objective:
    def __init__(self, disc: Discretization, q: float, R: float, side: Side):
        g = disc.grid
        inside = g.weights_inside(R)
        w = inside if side is Side.ORIGIN else g.weights - inside
        self.disc = disc
        self.q = q
        self.kw = w * disc.K
        self.core = disc.K_core if side is Side.ORIGIN and disc.free[0] else 0.0
        self.omega = g.omega
        self.free = disc.free
        self.metric = restrict_bands(disc.metric_bands(), disc.free)

    def value(self, u: np.ndarray) -> float:
        a = np.abs(u) ** self.q
        return self.omega * (float(self.kw @ a) + self.core * a[0])

    def gradient(self, u: np.ndarray) -> np.ndarray:
        g = self.kw * self.q * np.abs(u) ** (self.q - 1) * np.sign(u)
        g[0] += self.core * self.q * abs(u[0]) ** (self.q - 1) * np.sign(u[0])
        return self.omega * g

    def normalize(self, u: np.ndarray) -> np.ndarray:
        return u / self.disc.norm_p(u) ** (1.0 / self.disc.grid.p)


def _ascend(obj: _Objective, u: np.ndarray, budget: int):
    """Monotone ascent on the unit sphere; returns ``(u, value, iterations, converged)``.

    For ``p = 2`` each step is the normalized power iteration, which cannot
    decrease a convex objective. Otherwise a preconditioned step is
    backtracked until the objective increases.
    """
    p = obj.disc.grid.p
    u = obj.normalize(u)
    val = obj.value(u)
    tau = 1.0
    for it in range(1, budget + 1):
        g = obj.gradient(u)[obj.free]
        if p == 2:
            step = solve_banded((1, 1), obj.metric, g)
            trial = np.zeros_like(u)
            trial[obj.free] = step
            trial = obj.normalize(trial)
            new = obj.value(trial)
            if not math.isfinite(new):
                return u, math.inf, it, False
            if new < val:
                return u, val, it, True
        else:
            bands = restrict_bands(obj.disc.metric_bands(u), obj.free)
            d = solve_banded((1, 1), bands, g)
            scale = np.max(np.abs(u[obj.free])) / max(np.max(np.abs(d)), 1e-300)
            new = -math.inf
            for _ in range(60):
                trial = u.copy()
                trial[obj.free] += tau * scale * d
                trial = obj.normalize(trial)
                new = obj.value(trial)
                if new >= val:
                    break
                tau *= 0.5
            else:
                return u, val, it, True
            tau = min(tau * 2.0, 1e6)
        change = (new - val) / max(abs(new), 1e-300)
        u, val = trial, new
        if change < REL_TOL:
            return u, val, it, True
    return u, val, budget, False


def bump_starts(disc: Discretization, count: int = 8) -> list:
    """Gaussian bumps in ``log r`` with centers spread over the grid and two widths."""
    g = disc.grid
    t = np.log(g.nodes)
    lo, hi = t[0], t[-1]
    out = []
    for k in range(count):
        center = lo + (hi - lo) * (k + 0.5) / count
        width = (hi - lo) / (4 * count) * (1 + 3 * (k % 2))
        w = np.exp(-0.5 * ((t - center) / width) ** 2)
        w[(w < 1e-12) | ~disc.free] = 0.0
        if np.any(w > 0):
            out.append(w)
    return out


def estimate(side: Side, q, R: float, V, K, grid: RadialGrid, budget: int = 20000,
             starts: Optional[Sequence[np.ndarray]] = None, disc: Optional[Discretization] = None
             ) -> SupremumEstimate:
    q = float(q)
    if q <= 1:
        raise ValueError("q must exceed 1")
    if not grid.r_min < R < grid.r_max:
        raise ValueError(f"R={R} lies outside the grid span ({grid.r_min}, {grid.r_max})")
    disc = disc or Discretization.build(grid, V, K)
    obj = _Objective(disc, q, R, side)
    candidates = list(bump_starts(disc)) if starts is None else list(starts)
    best = None
    total = 0
    all_converged = True
    for w in candidates:
        w = np.asarray(w, dtype=float)
        norm = disc.norm_p(w)
        if not (norm > 0 and math.isfinite(norm)) or obj.value(w) == 0:
            continue
        u, val, it, ok = _ascend(obj, w, budget)
        total += it
        if not math.isfinite(val):
            return SupremumEstimate(side, q, R, best[1] if best else 0.0, total, False,
                                    RadialFunction(grid, u), diverged=True)
        all_converged = all_converged and ok
        if best is None or val > best[1]:
            best = (u, val)
    if best is None:
        return SupremumEstimate(side, q, R, 0.0, total, True, RadialFunction(grid, np.zeros(grid.nodes.size)))
    return SupremumEstimate(side, q, R, best[1], total, all_converged, RadialFunction(grid, best[0]))


def estimate_S0(q, R, V, K, grid: RadialGrid, budget: int = 20000, starts=None) -> SupremumEstimate:
    return estimate(Side.ORIGIN, q, R, V, K, grid, budget, starts)


def estimate_Sinf(q, R, V, K, grid: RadialGrid, budget: int = 20000, starts=None) -> SupremumEstimate:
    return estimate(Side.INFINITY, q, R, V, K, grid, budget, starts)


def witness_value(est: SupremumEstimate, V, K) -> float:
    """Recompute an estimate's objective from its witness alone."""
    disc = Discretization.build(est.witness.grid, V, K)
    return _Objective(disc, est.q, est.R, est.side).value(est.witness.values)


# ---------------------------------------------------------------------------
# decay classification

@dataclass(frozen=True)
class DecayRow:
    q: float
    side: Side
    estimates: tuple
    slope: float
    classification: str
    in_proven_range: Optional[bool] = None

    def to_dict(self) -> dict:
        out = {"q": self.q, "side": self.side.value, "slope": self.slope,
               "classification": self.classification,
               "estimates": [e.to_row() for e in self.estimates]}
        if self.in_proven_range is not None:
            out["range_note"] = "inside proven range" if self.in_proven_range else "outside proven range"
        return out


def classify(slope: float) -> str:
    if slope < -DECAY_SLOPE:
        return "decaying"
    if slope > DECAY_SLOPE:
        return "diverging"
    return "plateau"


def decay_report(q_values, R_schedule, side: Side, V, K, grid: Optional[RadialGrid] = None,
                 budget: int = 20000, proven=None) -> list:
    """Classify how the estimates behave as ``R -> 0`` (origin) or ``R -> inf``.

    The schedule must be geometric with ratio 2 or 1/2. Witnesses are carried
    from one radius to the next in the direction in which the supremum can
    only grow, so the estimates are monotone in ``R`` by construction. The
    slope is ``d ln S / d ln s`` with ``s = 1/R`` at the origin and ``s = R``
    at infinity, so decay shows as a negative slope.
    """
    Rs = [float(R) for R in R_schedule]
    ratios = {round(b / a, 12) for a, b in zip(Rs, Rs[1:])}
    if len(Rs) < 2 or not ratios <= {2.0, 0.5} or len(ratios) != 1:
        raise ValueError("the R schedule must be geometric with ratio 2 or 1/2")
    grid = grid or RadialGrid.log_spaced()
    disc = Discretization.build(grid, V, K)
    # supremum grows with R at the origin and shrinks with R at infinity
    order = sorted(Rs) if side is Side.ORIGIN else sorted(Rs, reverse=True)
    rows = []
    for q in q_values:
        base = bump_starts(disc)
        results = {}
        carried = None
        for R in order:
            starts = base + ([carried] if carried is not None else [])
            est = estimate(side, q, R, V, K, grid, budget, starts, disc)
            results[R] = est
            if est.witness is not None and est.value > 0:
                carried = est.witness.values
        ests = tuple(results[R] for R in Rs)
        s = np.array([1.0 / R if side is Side.ORIGIN else R for R in Rs])
        vals = np.array([max(e.value, 1e-300) for e in ests])
        if not all(e.converged for e in ests):
            slope, label = math.nan, "inconclusive"
        else:
            slope = float(np.polyfit(np.log(s), np.log(vals), 1)[0])
            label = classify(slope)
        inside = None if proven is None else bool(proven(q))
        rows.append(DecayRow(float(q), side, ests, slope, label, inside))
    return rows

"""Radial grids, piecewise-linear functions and the discrete weighted norm.

Functions are piecewise linear in ``r`` between nodes, constant on
``(0, r_0)`` and zero beyond ``r_M``; the last nodal value is therefore
pinned to zero. Integrals of ``f(r) r^(N-1)`` use the trapezoid rule in
``t = log r``, which suits log-spaced nodes. Gradient integrals are exact on
each element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as gamma_fn

DELTA = 1e-10


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2) / gamma_fn(N / 2)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    N: int
    p: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 17:
            raise ValueError("a grid needs at least 17 nodes (M >= 16)")
        if nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be positive and strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def log_spaced(cls, r_min: float = 1e-6, r_max: float = 1e3, M: int = 512,
                   N: int = 3, p: float = 2.0) -> "RadialGrid":
        return cls(np.geomspace(r_min, r_max, M + 1), N, p)

    @property
    def M(self) -> int:
        return self.nodes.size - 1

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def omega(self) -> float:
        return sphere_area(self.N)

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def element_mass(self) -> np.ndarray:
        """``int r^(N-1) dr`` over each element."""
        r = self.nodes
        return (r[1:] ** self.N - r[:-1] ** self.N) / self.N

    @property
    def log_cells(self):
        """Cell boundaries in log r around each node (trapezoid dual cells)."""
        t = np.log(self.nodes)
        mid = 0.5 * (t[1:] + t[:-1])
        return np.concatenate([[t[0]], mid]), np.concatenate([mid, [t[-1]]])

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights: ``sum_i W_i f(r_i) ~ int f(r) r^(N-1) dr``."""
        left, right = self.log_cells
        return (right - left) * self.nodes ** self.N

    def weights_inside(self, R: float) -> np.ndarray:
        """Weights restricted to ``r < R`` by splitting dual cells in log r."""
        left, right = self.log_cells
        cut = np.clip(math.log(R), left, right)
        return (cut - left) * self.nodes ** self.N

    def geometric_midpoints(self) -> np.ndarray:
        return np.sqrt(self.nodes[1:] * self.nodes[:-1])


@dataclass(eq=False)
class RadialFunction:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError("one value per node is required")

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.grid.nodes, self.values)
        return np.where(r > self.grid.r_max, 0.0, out)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / self.grid.h


def _sample(potential: Callable, grid: RadialGrid):
    """Nodal samples; non-finite nodes fall back to the mean over adjacent midpoints.

    Returns ``(values, singular)`` where ``singular`` flags nodes for which no
    finite sample exists.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = np.asarray(potential(grid.nodes), dtype=float).copy()
        bad = ~np.isfinite(vals)
        if not bad.any():
            return vals, np.zeros_like(bad)
        mids = np.asarray(potential(grid.geometric_midpoints()), dtype=float)
    finite = np.isfinite(mids)
    singular = np.zeros_like(bad)
    for i in np.flatnonzero(bad):
        cand = [mids[j] for j in (i - 1, i) if 0 <= j < mids.size and finite[j]]
        if cand:
            vals[i] = float(np.mean(cand))
        else:
            vals[i] = np.inf
            singular[i] = True
    return vals, singular


def _core_moment(potential, r0: float, N: int, sample0: float) -> float:
    if hasattr(potential, "moment_near_zero"):
        return potential.moment_near_zero(r0, N)
    return sample0 * r0 ** N / N


@dataclass(eq=False)
class Discretization:
    """Grid plus sampled V, K (and optional forcing Q).

    ``free`` marks the nodal unknowns: the last node is always pinned to zero,
    and so is any node where V or K is infinite, as well as node 0 when V or K is
    not integrable against ``r^(N-1)`` near the origin.
    """

    grid: RadialGrid
    V: np.ndarray
    K: np.ndarray
    V_core: float
    K_core: float
    free: np.ndarray
    Q: Optional[np.ndarray] = None
    Q_core: float = 0.0
    K_singular: np.ndarray = field(default=None)

    @classmethod
    def build(cls, grid: RadialGrid, V: Callable, K: Callable, Q: Optional[Callable] = None) -> "Discretization":
        r0 = grid.r_min
        v, v_sing = _sample(V, grid)
        k, k_sing = _sample(K, grid)
        v_core = _core_moment(V, r0, grid.N, v[0])
        k_core = _core_moment(K, r0, grid.N, k[0])
        free = ~(v_sing | k_sing)
        free[-1] = False
        if not (math.isfinite(v_core) and math.isfinite(k_core)):
            free[0] = False
        q = q_core = None
        if Q is not None:
            q, q_sing = _sample(Q, grid)
            if q_sing.any():
                raise ValueError("forcing term is singular on the grid")
            q_core = _core_moment(Q, r0, grid.N, q[0])
        v = np.where(v_sing, 0.0, v)
        k = np.where(k_sing, 0.0, k)
        return cls(grid, v, k, v_core, k_core, free, q, q_core or 0.0, k_sing)

    # -- the quadratic and p-homogeneous parts -------------------------------
    def norm_p(self, u: np.ndarray) -> float:
        """``||u||^p`` for nodal values ``u``."""
        g = self.grid
        p = g.p
        s = np.diff(u) / g.h
        total = np.sum(np.abs(s) ** p * g.element_mass) + np.sum(g.weights * self.V * np.abs(u) ** p)
        if u[0] != 0.0:
            if not math.isfinite(self.V_core):
                raise ValueError("u must vanish at node 0: V is not integrable near the origin")
            total += self.V_core * abs(u[0]) ** p
        return g.omega * total

    def norm_p_gradient(self, u: np.ndarray) -> np.ndarray:
        """Gradient of ``||u||^p / p`` with respect to nodal values."""
        g = self.grid
        p = g.p
        s = np.diff(u) / g.h
        flux = (s * s + DELTA * DELTA) ** ((p - 2) / 2) * s * g.element_mass / g.h
        grad = np.zeros_like(u)
        grad[:-1] -= flux
        grad[1:] += flux
        grad += g.weights * self.V * np.abs(u) ** (p - 2) * u if p >= 2 else \
            g.weights * self.V * (u * u + DELTA * DELTA) ** ((p - 2) / 2) * u
        if math.isfinite(self.V_core):
            grad[0] += self.V_core * (u[0] ** 2 + (DELTA * DELTA if p < 2 else 0.0)) ** ((p - 2) / 2) * u[0]
        return g.omega * grad

    def metric_bands(self, u: Optional[np.ndarray] = None) -> np.ndarray:
        """Banded (tridiagonal) matrix of a positive quadratic form.

        Without ``u`` this is the exponent-2 form ``||h||^2``. With ``u`` it is
        the Hessian of ``||u||^p / p``, regularized by ``DELTA`` and, for
        ``p != 2``, by ``1e-8`` times the exponent-2 form.
        """
        g = self.grid
        core_ok = math.isfinite(self.V_core)
        if u is None or g.p == 2:
            coef = g.element_mass / g.h ** 2
            diag_v = g.weights * self.V
            core = self.V_core if core_ok else 0.0
            return g.omega * _tridiag(coef, diag_v, core)
        p = g.p
        s = np.diff(u) / g.h
        coef = (p - 1) * (s * s + DELTA * DELTA) ** ((p - 2) / 2) * g.element_mass / g.h ** 2
        diag_v = (p - 1) * g.weights * self.V * (u * u + DELTA * DELTA) ** ((p - 2) / 2)
        core = (p - 1) * self.V_core * (u[0] ** 2 + DELTA * DELTA) ** ((p - 2) / 2) if core_ok else 0.0
        return g.omega * _tridiag(coef, diag_v, core) + 1e-8 * self.metric_bands()


def _tridiag(coef: np.ndarray, diag: np.ndarray, core: float) -> np.ndarray:
    n = diag.size
    bands = np.zeros((3, n))
    bands[1, :-1] += coef
    bands[1, 1:] += coef
    bands[0, 1:] = -coef
    bands[2, :-1] = -coef
    bands[1] += diag
    bands[1, 0] += core
    return bands


def restrict_bands(bands: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Tridiagonal bands restricted to the free index set.

    Free nodes always form a contiguous block here, so restriction keeps the
    tridiagonal structure.
    """
    idx = np.flatnonzero(free)
    if idx.size and np.any(np.diff(idx) != 1):
        raise ValueError("free nodes must be contiguous")
    sub = bands[:, idx].copy()
    if idx.size:
        sub[0, 0] = 0.0
        sub[2, -1] = 0.0
    return sub


def w_norm(u: RadialFunction, V: Callable) -> float:
    """Discrete weighted norm ``(int |u'|^p + V |u|^p)^(1/p)`` of a radial function."""
    grid = u.grid
    disc = Discretization.build(grid, V, lambda r: np.ones_like(r))
    pinned = ~disc.free
    pinned[-1] = False
    if np.any(u.values[pinned] != 0.0):
        bad = int(np.flatnonzero(pinned & (u.values != 0.0))[0])
        raise ValueError(f"V is singular around node {bad} (r={grid.nodes[bad]:.3g}) where u is nonzero")
    return disc.norm_p(u.values) ** (1.0 / grid.p)

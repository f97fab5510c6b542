"""Discrete energy functional and two critical-point searches.

The energy is ``I(u) = ||u||^p / p - int G(|x|, u) dx`` on P1 radial
functions, with ``G(r, t) = K(r) F(t) + Q(r) t``. Integrals use the grid's
log-trapezoid weights plus the core ``(0, r_0)`` moments, so ``energy`` and
``w_norm`` share one quadrature.

``solve_sublinear`` looks for a global minimizer by preconditioned descent
followed by Newton steps. ``solve_mountain_pass`` builds the mountain-pass
geometry (a positive rim and a point beyond it with negative energy), lowers
a discrete path between them, then refines the highest point on the fibering
(Nehari) set and polishes it with Newton's method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .exponents import DomainError
from .grid import DELTA, Discretization, RadialFunction, RadialGrid, restrict_bands
from .nonlinearity import NonlinearitySpec, _family_verdicts

GLOBAL_MIN = "GlobalMin"
MOUNTAIN_PASS = "MountainPass"


class SolverError(RuntimeError):
    """No start reached the residual tolerance; ``best`` holds the best iterate."""

    def __init__(self, message: str, best: Optional[RadialFunction] = None,
                 residual: float = math.inf, path: Optional[np.ndarray] = None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.path = path


class GeometryError(SolverError):
    """The mountain-pass geometry could not be found; hypotheses are suspect."""


@dataclass(frozen=True)
class SolverOptions:
    tol: Optional[float] = None
    seed: int = 0
    starts: int = 8
    max_iter: int = 2000
    newton_iter: int = 60
    truncate: bool = True
    path_points: int = 32
    path_sweeps: int = 200
    rim_samples: int = 32


@dataclass(frozen=True)
class Solution:
    u: RadialFunction
    energy: float
    residual: float
    kind: str
    nonneg_violation: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "energy": self.energy,
            "residual": self.residual,
            "nonneg_violation": self.nonneg_violation,
            "diagnostics": self.diagnostics,
            "r": self.u.grid.nodes.tolist(),
            "u": self.u.values.tolist(),
        }


# ---------------------------------------------------------------------------
# the discrete functional

class EnergyFunctional:
    """Energy, gradient and Hessian of the discrete functional on one grid."""

    def __init__(self, disc: Discretization, nl: NonlinearitySpec, truncate: bool = False):
        self.disc = disc
        self.nl = nl
        self.truncate = truncate
        g = disc.grid
        self.grid = g
        self.free = disc.free
        self.kw = g.weights * disc.K
        self.qw = None if disc.Q is None else g.weights * disc.Q
        self._metric = restrict_bands(disc.metric_bands(), self.free)

    @classmethod
    def build(cls, V, K, nl: NonlinearitySpec, grid: RadialGrid, truncate: bool = False) -> "EnergyFunctional":
        return cls(Discretization.build(grid, V, K, nl.forcing), nl, truncate)

    @property
    def p(self) -> float:
        return self.grid.p

    # nonlinear pieces, truncated to t >= 0 when requested
    def _F(self, u):
        v = self.nl.F(u)
        return np.where(u > 0, v, 0.0) if self.truncate else v

    def _f(self, u):
        v = self.nl.f(u)
        return np.where(u > 0, v, 0.0) if self.truncate else v

    def _df(self, u):
        v = self.nl.df(u)
        if v is None:
            raise ValueError("the nonlinearity has no derivative; Newton steps are unavailable")
        v = np.where(np.isfinite(v), v, 1e300)
        return np.where(u > 0, v, 0.0) if self.truncate else v

    def _check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.grid.nodes.shape:
            raise ValueError("one value per node is required")
        bad = np.flatnonzero(~self.free & (u != 0.0))
        if bad.size:
            i = int(bad[0])
            raise ValueError(f"u must vanish at pinned node {i} (r={self.grid.nodes[i]:.6g})")
        if not np.all(np.isfinite(u)):
            i = int(np.flatnonzero(~np.isfinite(u))[0])
            raise ValueError(f"non-finite value at node {i} (r={self.grid.nodes[i]:.6g})")
        return u

    def potential_part(self, u: np.ndarray) -> float:
        """``int G(|x|, u) dx``."""
        d = self.disc
        Fu = self._F(u)
        terms = self.kw * Fu
        total = float(np.sum(terms))
        if u[0] != 0:
            total += d.K_core * float(Fu[0])
        if self.qw is not None:
            total += float(np.sum(self.qw * u))
            if u[0] != 0:
                total += d.Q_core * u[0]
        if not math.isfinite(total):
            i = int(np.flatnonzero(~np.isfinite(terms))[0]) if not np.all(np.isfinite(terms)) else 0
            raise ValueError(f"non-finite integrand at node {i} (r={self.grid.nodes[i]:.6g})")
        return self.grid.omega * total

    def energy(self, u: np.ndarray) -> float:
        u = self._check(u)
        return self.disc.norm_p(u) / self.p - self.potential_part(u)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Nodal vector ``I'(u) e_i`` over hat functions ``e_i``."""
        u = self._check(u)
        d = self.disc
        fu = self._f(u)
        load = self.kw * fu
        if self.free[0]:
            load[0] += d.K_core * fu[0]
        if self.qw is not None:
            load = load + self.qw
            if self.free[0]:
                load[0] += d.Q_core
        return d.norm_p_gradient(u) - self.grid.omega * load

    def derivative(self, u: np.ndarray, h: np.ndarray) -> float:
        h = self._check(h)
        return float(self.gradient(u) @ h)

    def hessian_bands(self, u: np.ndarray) -> np.ndarray:
        """Tridiagonal Hessian restricted to the free nodes."""
        d = self.disc
        dfu = self._df(u)
        diag = self.kw * dfu
        if self.free[0]:
            diag[0] += d.K_core * dfu[0]
        bands = d.metric_bands(u if self.p != 2 else None).copy()
        bands[1] -= self.grid.omega * diag
        return restrict_bands(bands, self.free)

    def metric_solve(self, g_free: np.ndarray, u: Optional[np.ndarray] = None) -> np.ndarray:
        bands = self._metric if u is None or self.p == 2 else \
            restrict_bands(self.disc.metric_bands(u), self.free)
        return solve_banded((1, 1), bands, g_free)

    def residual(self, u: np.ndarray) -> float:
        """Dual norm of ``I'(u)`` for the exponent-2 norm on the free nodes."""
        g = self.gradient(u)[self.free]
        return float(math.sqrt(max(g @ self.metric_solve(g), 0.0)))

    def norm(self, u: np.ndarray) -> float:
        return self.disc.norm_p(u) ** (1.0 / self.p)

    def expand(self, free_values: np.ndarray) -> np.ndarray:
        out = np.zeros(self.grid.nodes.size)
        out[self.free] = free_values
        return out

    def fibering_maximum(self, w: np.ndarray) -> float:
        """``t > 0`` maximizing ``t -> I(t w)``; raises if the map never turns down."""
        phi_prime = lambda t: self.derivative(t * w, w)
        lo = 1.0
        for _ in range(200):
            if phi_prime(lo) > 0:
                break
            lo *= 0.5
        else:
            raise GeometryError("fibering map is not increasing near zero")
        hi = max(lo, 1.0)
        for _ in range(400):
            if phi_prime(hi) < 0:
                break
            hi *= 2.0
        else:
            raise GeometryError("fibering map does not decrease; energy is unbounded above along w")
        if hi == lo:
            return lo
        return brentq(phi_prime, lo, hi, xtol=1e-14, rtol=1e-13, maxiter=500)


# ---------------------------------------------------------------------------
# public functional helpers

def _functional(V, K, nl, grid, truncate):
    return EnergyFunctional.build(V, K, nl, grid, truncate)


def energy(u: RadialFunction, V, K, nl: NonlinearitySpec, truncate: bool = False) -> float:
    return _functional(V, K, nl, u.grid, truncate).energy(u.values)


def gradient_vector(u: RadialFunction, V, K, nl: NonlinearitySpec, truncate: bool = False) -> np.ndarray:
    return _functional(V, K, nl, u.grid, truncate).gradient(u.values)


def derivative(u: RadialFunction, h: RadialFunction, V, K, nl: NonlinearitySpec,
               truncate: bool = False) -> float:
    return _functional(V, K, nl, u.grid, truncate).derivative(u.values, h.values)


def residual(u: RadialFunction, V, K, nl: NonlinearitySpec, truncate: bool = False) -> float:
    return _functional(V, K, nl, u.grid, truncate).residual(u.values)


def fibering_maximum(u: RadialFunction, V, K, nl: NonlinearitySpec, truncate: bool = False) -> float:
    return _functional(V, K, nl, u.grid, truncate).fibering_maximum(u.values)


# ---------------------------------------------------------------------------
# start functions

def log_bumps(fn: EnergyFunctional, count: int, rng: Optional[np.random.Generator] = None) -> list:
    """Gaussian bumps in ``log r`` placed where ``K > 0`` on free nodes, unit norm."""
    g = fn.grid
    t = np.log(g.nodes)
    usable = fn.free & (fn.disc.K > 0)
    if not usable.any():
        raise GeometryError("K vanishes on every free node")
    lo, hi = t[usable][0], t[usable][-1]
    span = hi - lo
    out = []
    for k in range(count):
        if rng is None:
            center = lo + span * (k + 0.5) / count
            width = max(span / (2 * count), 0.5)
        else:
            center = rng.uniform(lo, hi)
            width = rng.uniform(0.25, max(span / 4, 0.5))
        w = np.exp(-0.5 * ((t - center) / width) ** 2)
        w[~fn.free] = 0.0
        n = fn.norm(w)
        if n > 0 and np.any(w[usable] > 1e-12):
            out.append(w / n)
    return out


# ---------------------------------------------------------------------------
# Newton polish

def _newton(fn: EnergyFunctional, u: np.ndarray, tol: float, iters: int, minimize: bool):
    """Damped Newton on the free nodes; steps must lower the residual.

    When ``minimize`` is set a step must also not raise the energy.
    """
    res = fn.residual(u)
    for _ in range(iters):
        if res <= tol:
            break
        g = fn.gradient(u)[fn.free]
        try:
            step = solve_banded((1, 1), fn.hessian_bands(u), -g)
        except (np.linalg.LinAlgError, ValueError):
            break
        if not np.all(np.isfinite(step)):
            break
        e0 = fn.energy(u) if minimize else 0.0
        alpha, accepted = 1.0, False
        for _ in range(40):
            trial = u.copy()
            trial[fn.free] += alpha * step
            try:
                r_new = fn.residual(trial)
                ok = r_new < res * (1 - 1e-4 * alpha)
                if minimize:
                    ok = ok and fn.energy(trial) <= e0 + 1e-14 * abs(e0)
            except ValueError:
                ok = False
            if ok:
                u, res, accepted = trial, r_new, True
                break
            alpha *= 0.5
        if not accepted:
            break
    return u, res


# ---------------------------------------------------------------------------
# global minimization

def _descend(fn: EnergyFunctional, u: np.ndarray, tol_fn: Callable[[float], float],
             max_iter: int):
    """Preconditioned gradient descent with Armijo backtracking.

    For ``p = 2`` a unit step is the fixed-point map ``u <- A^(-1) grad G(u)``.
    """
    e = fn.energy(u)
    res = fn.residual(u)
    it = 0
    for it in range(1, max_iter + 1):
        if res <= max(tol_fn(e), 0.0) * 1e2:
            break
        g = fn.gradient(u)[fn.free]
        d = -fn.metric_solve(g, u)
        slope = float(g @ d)
        if slope >= 0:
            break
        alpha = 1.0
        for _ in range(50):
            trial = u.copy()
            trial[fn.free] += alpha * d
            e_new = fn.energy(trial)
            if e_new <= e + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            break
        u, e = trial, e_new
        res = fn.residual(u)
    return u, e, res, it


def solve_sublinear(V, K, nl: NonlinearitySpec, grid: RadialGrid,
                    opts: SolverOptions = SolverOptions()) -> Solution:
    """Global minimizer of the energy from multi-start descent.

    Raises ``SolverError`` (with the best iterate) when no start meets
    ``residual <= tol * max(1, |energy|)``; ``tol`` defaults to ``1e-6``.
    """
    _check_exponents(nl, grid.p, sublinear=True)
    fn = EnergyFunctional.build(V, K, nl, grid, opts.truncate)
    tol = 1e-6 if opts.tol is None else opts.tol
    tol_fn = lambda e: tol * max(1.0, abs(e))
    rng = np.random.default_rng(opts.seed)
    starts = log_bumps(fn, opts.starts) if not nl.is_zero else []
    starts += log_bumps(fn, 1, rng)
    runs = []
    for k, w in enumerate(starts):
        # a small multiple of a bump already has negative energy when G grows sub-p-linearly
        u0 = w * 0.1
        u, e, res, it = _descend(fn, u0, tol_fn, opts.max_iter)
        u, res = _newton(fn, u, tol_fn(e), opts.newton_iter, minimize=True)
        u, e, res, it2 = _descend(fn, u, tol_fn, opts.max_iter) if res > tol_fn(fn.energy(u)) else \
            (u, fn.energy(u), res, 0)
        runs.append((e, res, u, k, it + it2))
    runs.sort(key=lambda item: (item[1] > tol_fn(item[0]), item[0]))
    e, res, u, k, iters = runs[0]
    if res > tol_fn(e):
        raise SolverError(f"no start reached residual tolerance (best {res:.3e})",
                          RadialFunction(grid, u), res)
    g6 = _holds(nl, "g6", grid.p)
    if g6 and not e < 0:
        raise SolverError("the minimizer should have negative energy under a sub-p-linear lower bound",
                          RadialFunction(grid, u), res)
    alternates = _alternates(runs, e, tol_fn, grid)
    u, e, res, clipped = _clip_roundoff(fn, u, e, res, tol_fn(e))
    diag = {"start": k, "iterations": iters, "tolerance": tol_fn(e), "delta": DELTA,
            "starts": len(starts), "alternates": alternates, "truncated": opts.truncate,
            "clipped_roundoff": clipped}
    return Solution(RadialFunction(grid, u), e, res, GLOBAL_MIN, max(0.0, -float(u.min())), diag)


def _clip_roundoff(fn: EnergyFunctional, u: np.ndarray, e: float, res: float, tol: float):
    """Zero roundoff-level negative values of a truncated solution.

    Critical points of the truncated functional are nonnegative, so values
    below ``1e-12 * max|u|`` in magnitude are rounding noise. The clipped
    iterate is kept only if it still meets the residual tolerance.
    """
    neg = -float(u.min())
    if not fn.truncate or neg <= 0 or neg > 1e-12 * float(np.abs(u).max()):
        return u, e, res, 0.0
    clipped = np.maximum(u, 0.0)
    res_c = fn.residual(clipped)
    if res_c > tol:
        return u, e, res, 0.0
    return clipped, fn.energy(clipped), res_c, neg


def _check_exponents(nl: NonlinearitySpec, p: float, sublinear: bool) -> None:
    """Growth exponents must sit on the correct side of ``p`` (custom families are not checked)."""
    if nl.family == "custom":
        return
    lo, hi = sorted((float(nl.q1), float(nl.q2)))
    if sublinear:
        forced = nl.forcing is not None
        if not (hi < p or (hi == p and lo < p and forced)):
            raise DomainError(f"global minimization needs q1, q2 < p = {p:g} "
                              f"(or max = p with a forcing term), got {nl.q1}, {nl.q2}")
    elif not lo > p:
        raise DomainError(f"the mountain-pass search needs q1, q2 > p = {p:g}, got {nl.q1}, {nl.q2}")


def _holds(nl: NonlinearitySpec, name: str, p: float) -> bool:
    if nl.family == "custom":
        return False
    verdicts = _family_verdicts(nl, Fraction(p).limit_denominator(10 ** 6))
    return verdicts[name].status == "holds"


def _alternates(runs, best_energy, tol_fn, grid) -> list:
    """Other converged critical values found by the multi-start (heuristic)."""
    seen = [best_energy]
    out = []
    for e, res, u, k, _ in runs[1:]:
        if res > tol_fn(e):
            continue
        if all(abs(e - s) > 1e-6 * max(1.0, abs(s)) for s in seen):
            seen.append(e)
            out.append({"start": k, "energy": e, "residual": res})
    return out


# ---------------------------------------------------------------------------
# mountain pass

def _rim(fn: EnergyFunctional, bumps: list, rho: float = 1.0):
    """Largest ``rho = 2^-k`` whose sampled sphere has positive minimal energy."""
    for _ in range(80):
        level = min(fn.energy(rho * w) for w in bumps)
        if level > 0:
            return rho, level
        rho *= 0.5
    raise GeometryError("no sphere with positive energy found; check the growth hypotheses")


def _far_point(fn: EnergyFunctional, w: np.ndarray, rho: float):
    lam = rho
    for _ in range(400):
        if fn.energy(lam * w) < 0:
            return lam * w
        lam *= 2.0
    raise GeometryError("energy stays nonnegative along a ray; no point beyond the rim")


def _band_matvec(bands: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = bands[1] * x
    y[:-1] += bands[0, 1:] * x[1:]
    y[1:] += bands[2, :-1] * x[:-1]
    return y


def _lower_path(fn: EnergyFunctional, end: np.ndarray, points: int, sweeps: int):
    """Lower the highest interior point of a discrete path from 0 to ``end``.

    The highest point moves along the preconditioned descent direction with
    its component along the path removed (in the exponent-2 metric); the
    endpoints stay fixed.
    """
    path = [k / (points - 1) * end for k in range(points)]
    energies = [fn.energy(u) for u in path]
    best_max = max(energies)
    stalled = 0
    for _ in range(sweeps):
        k = int(np.argmax(energies[1:-1])) + 1
        u = path[k]
        g = fn.gradient(u)[fn.free]
        d = -fn.metric_solve(g, u)
        tangent = (path[k + 1] - path[k - 1])[fn.free]
        At = _band_matvec(fn._metric, tangent)
        tt = float(tangent @ At)
        if tt > 0:
            d = d - float(d @ At) / tt * tangent
        slope = float(g @ d)
        if slope >= 0:
            break
        alpha = 1.0
        for _ in range(40):
            trial = u.copy()
            trial[fn.free] += alpha * d
            e_new = fn.energy(trial)
            if e_new <= energies[k] + 1e-4 * alpha * slope:
                path[k], energies[k] = trial, e_new
                break
            alpha *= 0.5
        current = max(energies)
        stalled = stalled + 1 if current > best_max * (1 - 1e-6) else 0
        best_max = min(best_max, current)
        if stalled >= points:
            break
    return path, energies


def _nehari_descent(fn: EnergyFunctional, w: np.ndarray, tol: float, max_iter: int):
    """Minimize ``J(w) = max_t I(t w)`` over directions.

    A unit step maps ``w`` to ``w - P^(-1) I'(t* w) / t*``; for ``p = 2`` and a
    pure power this is the normalized power iteration.
    """
    w = w / fn.norm(w)
    t = fn.fibering_maximum(w)
    J = fn.energy(t * w)
    res = fn.residual(t * w)
    it = 0
    for it in range(1, max_iter + 1):
        if res <= tol:
            break
        u = t * w
        g = fn.gradient(u)[fn.free]
        d = -fn.metric_solve(g, u) / t
        tau, moved = 1.0, False
        for _ in range(40):
            trial = w.copy()
            trial[fn.free] += tau * d
            n = fn.norm(trial)
            if n > 0:
                trial = trial / n
                try:
                    t_new = fn.fibering_maximum(trial)
                    J_new = fn.energy(t_new * trial)
                except GeometryError:
                    J_new = math.inf
                if J_new < J - 1e-15 * abs(J):
                    w, t, J, moved = trial, t_new, J_new, True
                    break
            tau *= 0.5
        res = fn.residual(t * w)
        if not moved:
            break
    return t * w, J, res, it


def solve_mountain_pass(V, K, nl: NonlinearitySpec, grid: RadialGrid,
                        opts: SolverOptions = SolverOptions()) -> Solution:
    """Mountain-pass critical point with positive energy.

    ``tol`` defaults to ``1e-5``. Raises ``GeometryError`` if the rim or the
    far point cannot be found and ``SolverError`` (with the path) when the
    refinement stalls above the tolerance.
    """
    _check_exponents(nl, grid.p, sublinear=False)
    if nl.forcing is not None:
        raise DomainError("the mountain-pass search needs g(r, 0) = 0; drop the forcing term")
    fn = EnergyFunctional.build(V, K, nl, grid, opts.truncate)
    tol = 1e-5 if opts.tol is None else opts.tol
    rng = np.random.default_rng(opts.seed)
    bumps = log_bumps(fn, opts.starts)
    rim_bumps = bumps + log_bumps(fn, opts.rim_samples, rng)
    rho, rim_level = _rim(fn, rim_bumps)

    runs = []
    for k, w in enumerate(bumps):
        end = _far_point(fn, w, rho)
        path, energies = _lower_path(fn, end, opts.path_points, opts.path_sweeps)
        top = path[int(np.argmax(energies))]
        u, e, res, it = _nehari_descent(fn, top, tol * 1e2, opts.max_iter)
        u, res = _newton(fn, u, tol, opts.newton_iter, minimize=False)
        e = fn.energy(u)
        runs.append((e, res, u, k, it, path))
    ok = [r for r in runs if r[1] <= tol and r[0] > 0]
    if not ok:
        e, res, u, k, it, path = min(runs, key=lambda item: item[1])
        raise SolverError(f"mountain-pass refinement stalled (best residual {res:.3e})",
                          RadialFunction(grid, u), res, np.array(path))
    ok.sort(key=lambda item: item[0])
    e, res, u, k, it, _ = ok[0]
    # the rim infimum also covers the solution's own direction
    rim_level = min(rim_level, fn.energy(rho * u / fn.norm(u)))
    if not (e >= rim_level > 0):
        raise GeometryError(f"critical level {e:.6g} lies below the rim level {rim_level:.6g}",
                            RadialFunction(grid, u), res)
    alternates = _alternates([(r[0], r[1], r[2], r[3], r[4]) for r in ok], e, lambda _: tol, grid)
    u, e, res, clipped = _clip_roundoff(fn, u, e, res, tol)
    diag = {"start": k, "iterations": it, "tolerance": tol, "delta": DELTA, "rim_radius": rho,
            "rim_level": float(rim_level), "starts": len(bumps), "alternates": alternates,
            "truncated": opts.truncate, "clipped_roundoff": clipped}
    return Solution(RadialFunction(grid, u), e, res, MOUNTAIN_PASS, max(0.0, -float(u.min())), diag)

"""Model nonlinearities ``g(r, t) = K(r) f(t) + Q(r)`` and their hypotheses.

Hypothesis labels follow the usual list for this class of problems:

* ``f_bound``: ``|f(t)| <= M min{|t|^(q1-1), |t|^(q2-1)}``;
* ``g0``: the forcing ``Q`` is integrable enough (three sufficient tests);
* ``g1``: ``0 <= theta G <= g t`` for ``t >= 0`` with ``theta > p``;
* ``g2``: ``G(r, t0) > 0`` for some ``t0 > 0``;
* ``g3``: ``0 < theta G <= g t`` for ``t >= t0`` with ``theta > p``;
* ``g4``: ``G >= m K min{t^q1, t^q2}``;
* ``g5``: ``f`` odd;
* ``g6``: ``G >= m K t^theta`` on ``[0, t0]`` with ``theta < p``;
* ``g7``: ``Q`` is not identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.special import hyp2f1

from .catalog import best_ranges, integrable_near, is_K_L1_global
from .exponents import ProblemDims, Side
from .potentials import PotentialSpec, Term, dominant_term

FAMILIES = ("pure_power", "min_power", "rational_power", "log_perturbed", "custom")

_GL_Y, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_Y = 0.5 * (_GL_Y + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class NonlinearitySpec:
    """A nonlinearity family with exponents and an optional forcing term."""

    family: str
    q1: Fraction
    q2: Fraction
    epsilon: Fraction = Fraction(0)
    forcing: Optional[PotentialSpec] = None
    custom_f: Optional[Callable] = field(default=None, compare=False)
    custom_F: Optional[Callable] = field(default=None, compare=False)
    custom_df: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "q1", Fraction(self.q1))
        object.__setattr__(self, "q2", Fraction(self.q2))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.q1 <= 1 or self.q2 <= 1:
            raise ValueError("exponents must exceed 1")
        if self.family == "pure_power" and self.q1 != self.q2:
            raise ValueError("pure_power uses a single exponent")
        if self.family in ("rational_power", "log_perturbed") and self.q1 > self.q2:
            raise ValueError("this family needs q1 <= q2")
        if self.family == "log_perturbed" and self.epsilon <= 0:
            raise ValueError("log_perturbed needs epsilon > 0")
        if self.family == "custom" and (self.custom_f is None or self.custom_F is None):
            raise ValueError("custom family needs f and F callables")

    # -- constructors --------------------------------------------------------
    @classmethod
    def pure_power(cls, q, forcing=None) -> "NonlinearitySpec":
        return cls("pure_power", q, q, forcing=forcing)

    @classmethod
    def min_power(cls, q1, q2, forcing=None) -> "NonlinearitySpec":
        return cls("min_power", q1, q2, forcing=forcing)

    @classmethod
    def rational_power(cls, q1, q2, forcing=None) -> "NonlinearitySpec":
        return cls("rational_power", q1, q2, forcing=forcing)

    @classmethod
    def log_perturbed(cls, q1, q2, epsilon, forcing=None) -> "NonlinearitySpec":
        return cls("log_perturbed", q1, q2, epsilon, forcing=forcing)

    @classmethod
    def custom(cls, f, F, q1=2, q2=2, df=None, forcing=None) -> "NonlinearitySpec":
        return cls("custom", q1, q2, forcing=forcing, custom_f=f, custom_F=F, custom_df=df)

    @classmethod
    def zero(cls, forcing=None) -> "NonlinearitySpec":
        z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        return cls.custom(z, z, df=z, forcing=forcing)

    # -- evaluation ------------------------------------------------------------
    def f(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        fam = self.family
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam == "pure_power":
                return np.sign(t) * a ** (float(self.q1) - 1)
            if fam == "min_power":
                lo, hi = sorted((float(self.q1), float(self.q2)))
                return np.sign(t) * np.where(a <= 1, a ** (hi - 1), a ** (lo - 1))
            if fam == "rational_power":
                q1, q2 = float(self.q1), float(self.q2)
                return np.sign(t) * a ** (q2 - 1) / (1 + a ** (q2 - q1))
            if fam == "log_perturbed":
                return self._log_f(a)
        return np.asarray(self.custom_f(t), dtype=float)

    def _log_f(self, a: np.ndarray) -> np.ndarray:
        q1, q2, eps = float(self.q1), float(self.q2), float(self.epsilon)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = a ** (q2 - 1 + eps) * np.log(a) / (1 + a ** (q2 - q1 + 2 * eps))
        return np.where(a > 0, out, 0.0)

    def F(self, t) -> np.ndarray:
        """Primitive ``F(t) = int_0^t f``."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        fam = self.family
        if fam == "pure_power":
            q = float(self.q1)
            return a ** q / q
        if fam == "min_power":
            lo, hi = sorted((float(self.q1), float(self.q2)))
            return np.where(a <= 1, a ** hi / hi, 1 / hi + (a ** lo - 1) / lo)
        if fam == "rational_power":
            q1, q2 = float(self.q1), float(self.q2)
            c = q2 - q1
            if c == 0:
                return a ** q2 / (2 * q2)
            return a ** q2 / q2 * hyp2f1(1.0, q2 / c, 1.0 + q2 / c, -a ** c)
        if fam == "log_perturbed":
            # F is odd because f is even; substitute x = y^2 to tame the log near 0
            x = _GL_Y ** 2
            vals = self._log_f(a[..., None] * x) * 2 * _GL_Y
            return np.sign(t) * a * (vals @ _GL_W)
        return np.asarray(self.custom_F(t), dtype=float)

    def df(self, t) -> Optional[np.ndarray]:
        """Derivative of ``f`` where available; ``None`` for custom without one."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        fam = self.family
        with np.errstate(divide="ignore", invalid="ignore"):
            if fam == "pure_power":
                q = float(self.q1)
                return (q - 1) * a ** (q - 2)
            if fam == "min_power":
                lo, hi = sorted((float(self.q1), float(self.q2)))
                return np.where(a <= 1, (hi - 1) * a ** (hi - 2), (lo - 1) * a ** (lo - 2))
            if fam == "rational_power":
                q1, q2 = float(self.q1), float(self.q2)
                c = q2 - q1
                d = 1 + a ** c
                return ((q2 - 1) * a ** (q2 - 2) * d - c * a ** (q2 + c - 2)) / d ** 2
            if fam == "log_perturbed":
                step = 1e-6 * np.maximum(a, 1e-3)
                return np.sign(t) * (self._log_f(a + step) - self._log_f(np.abs(a - step))) / (2 * step)
        if self.custom_df is None:
            return None
        return np.asarray(self.custom_df(t), dtype=float)

    @property
    def is_zero(self) -> bool:
        return self.family == "custom" and not np.any(self.f(np.array([0.5, 1.0, 2.0])))

    def to_dict(self) -> dict:
        out = {"family": self.family, "q1": str(self.q1), "q2": str(self.q2)}
        if self.family == "log_perturbed":
            out["epsilon"] = str(self.epsilon)
        if self.forcing is not None:
            out["forcing"] = self.forcing.text
        return out


# ---------------------------------------------------------------------------
# hypothesis report

@dataclass(frozen=True)
class Verdict:
    status: str
    witnesses: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.witnesses:
            out["witnesses"] = {k: str(v) for k, v in self.witnesses.items()}
        if self.note:
            out["note"] = self.note
        return out


HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"


def _family_verdicts(nl: NonlinearitySpec, p: Fraction) -> dict:
    fam = nl.family
    out = {}
    if fam in ("pure_power", "min_power", "rational_power"):
        lo, hi = sorted((nl.q1, nl.q2))
        rational = fam == "rational_power"
        out["f_bound"] = Verdict(HOLDS, {"M": 1, "q1": nl.q1, "q2": nl.q2})
        out["g1"] = Verdict(HOLDS, {"theta": lo}) if lo > p else Verdict(FAILS, note="growth at infinity does not exceed p")
        out["g2"] = Verdict(HOLDS, {"t0": 1})
        out["g3"] = Verdict(HOLDS, {"theta": lo, "t0": 1}) if lo > p else Verdict(FAILS, note="growth at infinity does not exceed p")
        m = Fraction(1, 2) / hi if rational else 1 / hi
        out["g4"] = Verdict(HOLDS, {"m": m})
        out["g5"] = Verdict(HOLDS)
        out["g6"] = Verdict(HOLDS, {"theta": hi, "t0": 1, "m": m}) if hi < p else Verdict(FAILS, note="growth near zero is not below p")
        return out
    if fam == "log_perturbed":
        q1, q2, eps = nl.q1, nl.q2, nl.epsilon
        t = np.geomspace(1e-12, 1e12, 4001)
        ratio = np.abs(nl.f(t)) / np.minimum(t ** float(q1 - 1), t ** float(q2 - 1))
        out["f_bound"] = Verdict(HOLDS, {"M": f"{float(ratio.max()):.6g}", "q1": q1, "q2": q2},
                                 "M estimated by sampling t in [1e-12, 1e12]")
        out["g1"] = Verdict(FAILS, note="G is negative on (0, 1)")
        out["g2"] = Verdict(HOLDS, note="F grows without bound")
        if q1 - eps > p:
            theta = (p + q1 - eps) / 2
            ts = np.geomspace(1.0, 1e12, 2001)
            Fv, fv = nl.F(ts), nl.f(ts)
            good = (Fv > 0) & (float(theta) * Fv <= fv * ts)
            bad_idx = np.flatnonzero(~good)
            t0 = ts[bad_idx[-1] + 1] if bad_idx.size and bad_idx[-1] + 1 < ts.size else (ts[0] if not bad_idx.size else None)
            if t0 is None:
                out["g3"] = Verdict(UNKNOWN, {"theta": theta}, "no threshold found on sampled range")
            else:
                out["g3"] = Verdict(HOLDS, {"theta": theta, "t0": f"{t0:.6g}"}, "t0 located by sampling")
        else:
            out["g3"] = Verdict(FAILS, note="q1 - epsilon does not exceed p")
        out["g4"] = Verdict(FAILS, note="G is negative on (0, 1)")
        out["g5"] = Verdict(FAILS, note="f is even")
        out["g6"] = Verdict(FAILS, note="G is negative on (0, 1)")
        return out
    for name in ("f_bound", "g1", "g2", "g3", "g4", "g5", "g6"):
        out[name] = Verdict(UNKNOWN, note="custom nonlinearity")
    return out


def _forcing_verdicts(Q: Optional[PotentialSpec], V: PotentialSpec, dims: ProblemDims) -> dict:
    p, N = dims.p.fraction, dims.N
    if Q is None or all(pc.is_zero for pc in Q.pieces):
        return {"g0": Verdict(HOLDS, note="no forcing"), "g7": Verdict(FAILS, note="no forcing")}
    conj = p / (p - 1)
    tests = {}
    w1 = N + 1 / (p - 1)
    tests["weighted_dual"] = all(integrable_near(Q.end_terms(s), s, w1, conj) for s in Side)
    s2 = p * N / (p * N - N + p)
    tests["lebesgue"] = all(integrable_near(Q.end_terms(s), s, Fraction(N - 1), s2) for s in Side)
    if V.has_zero_piece:
        tests["potential_weighted"] = False
    else:
        ok = True
        for s in Side:
            qt, vt = dominant_term(Q.end_terms(s), s), dominant_term(V.end_terms(s), s)
            merged = Term(Fraction(1), qt.e - vt.e / p, qt.s_inf - vt.s_inf / p, qt.s_zero - vt.s_zero / p)
            ok = ok and integrable_near((merged,), s, Fraction(N - 1), conj)
        tests["potential_weighted"] = ok
    passed = [k for k, v in tests.items() if v]
    g0 = Verdict(HOLDS, {"criterion": passed[0]}) if passed else \
        Verdict(UNKNOWN, note="none of the sufficient integrability tests applies")
    return {"g0": g0, "g7": Verdict(HOLDS, note="forcing is positive on a piece")}


@dataclass
class HypothesisReport:
    verdicts: dict
    embedding: Verdict
    routes: dict

    def holds(self, name: str) -> bool:
        return self.verdicts[name].status == HOLDS

    def to_dict(self) -> dict:
        return {"hypotheses": {k: v.to_dict() for k, v in self.verdicts.items()},
                "embedding": self.embedding.to_dict(), "routes": self.routes}


def check_hypotheses(nl: NonlinearitySpec, V: PotentialSpec, K: PotentialSpec,
                     dims: ProblemDims) -> HypothesisReport:
    """Per-hypothesis verdicts plus which existence route they support."""
    p = dims.p.fraction
    verdicts = _family_verdicts(nl, p)
    verdicts.update(_forcing_verdicts(nl.forcing, V, dims))
    k_l1 = is_K_L1_global(K, dims)
    verdicts["K_integrable"] = Verdict(HOLDS if k_l1 else FAILS)

    conclusion = best_ranges(V, K, dims).conclusion
    q1, q2 = nl.q1, nl.q2
    pairs = [(q1, q2), (q2, q1)]
    ok = any(conclusion.q1set.contains(a) and conclusion.q2set.contains(b) for a, b in pairs)
    embedding = Verdict(HOLDS if ok else UNKNOWN,
                        {"q1set": conclusion.q1set, "q2set": conclusion.q2set},
                        "" if ok else "exponents lie outside the proven ranges")

    h = lambda name: verdicts[name].status == HOLDS
    forced = nl.forcing is not None and h("g7")
    superlinear = min(q1, q2) > p
    sublinear = max(q1, q2) < p or (max(q1, q2) == p and forced)
    routes = {
        "mountain_pass": bool(superlinear and ok and not forced and h("f_bound")
                              and ((h("g1") and h("g2")) or (k_l1 and h("g3")))),
        "minimization": bool(sublinear and ok and h("f_bound") and h("g0") and (h("g6") or forced)),
    }
    return HypothesisReport(verdicts, embedding, routes)

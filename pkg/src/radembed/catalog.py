"""Asymptotic analysis of catalog potentials and best exponent ranges.

Near each end only the dominant term of V and of K matters. The ratio
``K / (r^alpha V^beta)`` then behaves like
``r^(e_K - alpha - beta e_V) * exp((s_K - beta s_V) * rate)``, so the set of
admissible ``beta`` splits into a part where any alpha works and a part where
alpha is bounded by the affine function ``e_K - beta e_V``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .exponents import (
    ExponentSet,
    EmbeddingConclusion,
    ProblemDims,
    Side,
    combine,
    q_double_star,
    q_lower_star,
    q_star_upper,
    region_slice_parts,
)
from .extended import INF, NEG_INF, ONE, ZERO, ExtendedRational, emax, emin, ext
from .potentials import PotentialSpec, dominant_term


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class BetaSegment:
    """Interval of beta with a common description of the alpha bound.

    ``alpha_inf`` is set when every alpha is admissible on the segment;
    otherwise the bound is ``alpha_const + alpha_slope * beta``.
    """

    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True
    alpha_const: Optional[Fraction] = None
    alpha_slope: Optional[Fraction] = None
    alpha_inf: Optional[ExtendedRational] = None

    def alpha(self, beta) -> ExtendedRational:
        if self.alpha_inf is not None:
            return self.alpha_inf
        return ext(self.alpha_const + self.alpha_slope * Fraction(beta))

    def contains(self, beta: Fraction) -> bool:
        above = beta > self.lo or (self.lo_closed and beta == self.lo)
        below = beta < self.hi or (self.hi_closed and beta == self.hi)
        return above and below

    def describe(self) -> dict:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        if self.alpha_inf is not None:
            bound = str(self.alpha_inf)
        else:
            bound = f"{self.alpha_const} + ({self.alpha_slope})*beta"
        return {"beta": f"{left}{self.lo}, {self.hi}{right}", "alpha_bound": bound}


@dataclass(frozen=True)
class ProfileCandidates:
    """Admissible ``(alpha, beta)`` pairs and the best ``gamma`` at one end.

    At the origin alpha may be anything up to the bound; at infinity anything
    from the bound upwards. ``gamma_best`` may be infinite: ``+inf`` at the
    origin (any gamma works) and ``-inf`` at infinity.
    """

    side: Side
    segments: tuple
    gamma_best: Optional[ExtendedRational]
    notes: tuple = ()

    def alpha_bound(self, beta) -> Optional[ExtendedRational]:
        beta = Fraction(beta)
        for seg in self.segments:
            if seg.contains(beta):
                return seg.alpha(beta)
        return None

    @property
    def feasible(self) -> bool:
        return bool(self.segments)


def _solve_sets(h0: Fraction, h1: Fraction):
    """Split ``[0, 1]`` by the sign of ``h0 - beta * h1``.

    Returns ``(negative_part, zero_part)`` as (lo, hi, lo_closed, hi_closed)
    tuples or ``None``.
    """
    if h1 == 0:
        if h0 < 0:
            return (Fraction(0), Fraction(1), True, True), None
        if h0 == 0:
            return None, (Fraction(0), Fraction(1), True, True)
        return None, None
    root = h0 / h1
    zero = (root, root, True, True) if 0 <= root <= 1 else None
    if h1 > 0:
        lo = max(root, Fraction(0))
        neg = (lo, Fraction(1), root < 0, True) if lo < 1 else None
    else:
        hi = min(root, Fraction(1))
        neg = (Fraction(0), hi, True, root > 1) if hi > 0 else None
    return neg, zero


def analyze_end(V: PotentialSpec, K: PotentialSpec, side: Side, dims: ProblemDims) -> ProfileCandidates:
    """Exact description of the admissible profiles at ``side``."""
    side = Side(side)
    k_terms = K.end_terms(side)
    if not k_terms or K.has_zero_piece:
        raise CatalogError("K must be positive near both ends")
    kt = dominant_term(k_terms, side)
    unbounded = INF if side is Side.ORIGIN else NEG_INF
    notes = []

    if V.is_zero_near(side):
        notes.append("V vanishes near this end; only beta = 0 is admissible")
        if kt.rate(side) < 0:
            segs = (BetaSegment(Fraction(0), Fraction(0), alpha_inf=unbounded),)
        elif kt.rate(side) == 0:
            segs = (BetaSegment(Fraction(0), Fraction(0), alpha_const=kt.e, alpha_slope=Fraction(0)),)
        else:
            segs = ()
        return ProfileCandidates(side, segs, None, tuple(notes))

    vt = dominant_term(V.end_terms(side), side)
    neg, zero = _solve_sets(kt.rate(side), vt.rate(side))
    segs = []
    if neg is not None:
        segs.append(BetaSegment(neg[0], neg[1], neg[2], neg[3], alpha_inf=unbounded))
    if zero is not None:
        segs.append(BetaSegment(zero[0], zero[1], zero[2], zero[3], alpha_const=kt.e, alpha_slope=-vt.e))
    segs.sort(key=lambda s: (s.lo, s.hi))

    rate_v = vt.rate(side)
    gamma: Optional[ExtendedRational] = None
    if side is Side.ORIGIN:
        if rate_v > 0:
            gamma = INF
        elif rate_v == 0 and ext(-vt.e) >= dims.p:
            gamma = ext(-vt.e)
    else:
        if rate_v > 0:
            gamma = NEG_INF
        elif rate_v == 0 and ext(-vt.e) <= dims.p:
            gamma = ext(-vt.e)
    return ProfileCandidates(side, tuple(segs), gamma, tuple(notes))


# ---------------------------------------------------------------------------
# exact optimization over beta

PartsFn = Callable[[ExtendedRational, ExtendedRational], tuple]


@dataclass(frozen=True)
class OptimizedRange:
    interval: ExponentSet
    lower_witness: Optional[tuple] = None
    upper_witness: Optional[tuple] = None
    notes: tuple = ()

    def to_dict(self) -> dict:
        w = lambda x: None if x is None else {"beta": str(x[0]), "alpha": str(x[1])}
        return {"interval": self.interval.to_dict(), "lower_witness": w(self.lower_witness),
                "upper_witness": w(self.upper_witness), "notes": list(self.notes)}


def _line(f_lo, f_hi, lo, hi):
    """Affine function through two finite samples, as (value_at_0, slope)."""
    slope = (f_hi - f_lo) / (hi - lo)
    return f_lo - slope * lo, slope


def _crossings(values_lo, values_hi, lo: Fraction, hi: Fraction):
    lines = []
    for a, b in zip(values_lo, values_hi):
        if a.is_finite and b.is_finite:
            lines.append(_line(a.fraction, b.fraction, lo, hi))
    points = set()
    for i, (c1, m1) in enumerate(lines):
        if m1 != 0:
            points.add(-c1 / m1)
        for c2, m2 in lines[i + 1:]:
            if m1 != m2:
                points.add((c2 - c1) / (m1 - m2))
    return {x for x in points if lo < x < hi}


def _evaluate(parts: PartsFn, seg: BetaSegment, beta: Fraction):
    lowers, uppers, slacks = parts(seg.alpha(beta), ext(beta))
    return max(lowers), min(uppers), slacks


def _nonempty(lower, upper, slacks) -> bool:
    return lower < upper and all(s > 0 for s in slacks)


def _optimize_segment(parts: PartsFn, seg: BetaSegment):
    lo, hi = seg.lo, seg.hi
    if lo == hi:
        lower, upper, slacks = _evaluate(parts, seg, lo)
        if not _nonempty(lower, upper, slacks):
            return None
        return lower, upper, lo, lo
    def flat(beta):
        lowers, uppers, slacks = parts(seg.alpha(beta), ext(beta))
        return [*lowers, *uppers, *slacks, ZERO]

    candidates = sorted({lo, hi} | _crossings(flat(lo), flat(hi), lo, hi))
    mids = [(a + b) / 2 for a, b in zip(candidates, candidates[1:])]
    ok_mid = [_nonempty(*_evaluate(parts, seg, m)) for m in mids]
    closure = []
    for i, c in enumerate(candidates):
        near = (i > 0 and ok_mid[i - 1]) or (i < len(mids) and ok_mid[i])
        if near or _nonempty(*_evaluate(parts, seg, c)):
            closure.append(c)
    if not closure:
        return None
    best_lo = best_hi = None
    for c in closure:
        lower, upper, _ = _evaluate(parts, seg, c)
        if best_lo is None or lower < best_lo[0]:
            best_lo = (lower, c)
        if best_hi is None or upper > best_hi[0]:
            best_hi = (upper, c)
    return best_lo[0], best_hi[0], best_lo[1], best_hi[1]


def optimize_over_beta(parts: PartsFn, candidates: ProfileCandidates) -> OptimizedRange:
    """Union over admissible beta of the q-intervals described by ``parts``.

    Along each segment every part is affine in beta, so the extremes of the
    (convex) lower and (concave) upper envelopes sit at segment ends or at
    pairwise crossings. Those finitely many points are evaluated exactly.
    """
    found = []
    for seg in candidates.segments:
        res = _optimize_segment(parts, seg)
        if res is not None:
            lower, upper, b_lo, b_hi = res
            found.append((lower, upper, (b_lo, seg.alpha(b_lo)), (b_hi, seg.alpha(b_hi))))
    if not found:
        return OptimizedRange(ExponentSet.empty(), notes=("no admissible beta yields a nonempty range",))
    found.sort(key=lambda item: item[0])
    merged = [list(found[0])]
    for item in found[1:]:
        cur = merged[-1]
        if item[0] < cur[1]:
            if item[1] > cur[1]:
                cur[1], cur[3] = item[1], item[3]
        else:
            merged.append(list(item))
    notes = ()
    if len(merged) > 1:
        notes = ("admissible ranges are disconnected; reporting the widest piece",)
        merged.sort(key=lambda m: (float(m[1]) - float(m[0])), reverse=True)
    best = merged[0]
    return OptimizedRange(ExponentSet(best[0], best[1]), best[2], best[3], notes)


def beta_grid_check(parts: PartsFn, candidates: ProfileCandidates, result: OptimizedRange,
                    max_denominator: int = 64) -> int:
    """Verify no rational beta with small denominator beats ``result``.

    Returns the number of grid points examined.
    """
    grid = sorted({Fraction(k, d) for d in range(1, max_denominator + 1) for k in range(d + 1)})
    seen = 0
    for seg in candidates.segments:
        for beta in grid:
            if not seg.contains(beta):
                continue
            seen += 1
            lower, upper, slacks = _evaluate(parts, seg, beta)
            if not _nonempty(lower, upper, slacks):
                continue
            if lower < result.interval.lower or upper > result.interval.upper:
                raise AssertionError(f"beta={beta} gives ({lower}, {upper}), outside {result.interval}")
    return seen


# ---------------------------------------------------------------------------
# per-theorem interval descriptions

def _parts_origin(dims: ProblemDims) -> PartsFn:
    def parts(alpha, beta):
        return [ONE, dims.p * beta], [q_star_upper(alpha, beta, dims)], []
    return parts


def _parts_origin_gamma(dims: ProblemDims, gamma: ExtendedRational) -> PartsFn:
    def parts(alpha, beta):
        return region_slice_parts(alpha, beta, gamma, dims)
    return parts


def _parts_infinity(dims: ProblemDims) -> PartsFn:
    def parts(alpha, beta):
        return [ONE, dims.p * beta, q_star_upper(alpha, beta, dims)], [INF], []
    return parts


def _parts_infinity_gamma(dims: ProblemDims, gamma: ExtendedRational) -> PartsFn:
    def parts(alpha, beta):
        base = [ONE, dims.p * beta]
        if gamma.is_neg_inf:
            return base, [INF], []
        return base + [q_lower_star(alpha, beta, gamma, dims),
                       q_double_star(alpha, beta, gamma, dims)], [INF], []
    return parts


@dataclass
class EndReport:
    side: Side
    candidates: ProfileCandidates
    ranges: dict = field(default_factory=dict)
    chosen: str = ""

    @property
    def best(self) -> ExponentSet:
        if not self.chosen:
            return ExponentSet.empty()
        return self.ranges[self.chosen].interval

    def to_dict(self) -> dict:
        g = self.candidates.gamma_best
        return {
            "side": self.side.value,
            "gamma_best": None if g is None else str(g),
            "segments": [s.describe() for s in self.candidates.segments],
            "notes": list(self.candidates.notes),
            "ranges": {name: r.to_dict() for name, r in self.ranges.items()},
            "chosen": self.chosen,
        }


@dataclass
class RangeReport:
    conclusion: EmbeddingConclusion
    origin: EndReport
    infinity: EndReport
    beta_search: str = "exact"

    def to_dict(self) -> dict:
        return {"conclusion": self.conclusion.to_dict(), "origin": self.origin.to_dict(),
                "infinity": self.infinity.to_dict(), "beta_search": self.beta_search}


def _pick(report: EndReport) -> None:
    """Prefer the gamma-refined range, which contains the basic one."""
    for name in ("with_gamma", "basic"):
        r = report.ranges.get(name)
        if r is not None and not r.interval.is_empty:
            report.chosen = name
            break
    basic, refined = report.ranges.get("basic"), report.ranges.get("with_gamma")
    if basic and refined and not basic.interval.is_empty:
        b, g = basic.interval, refined.interval
        if g.is_empty or b.lower < g.lower or b.upper > g.upper:
            raise AssertionError(f"refined range {g} does not contain the basic range {b}")


def best_ranges(V: PotentialSpec, K: PotentialSpec, dims: ProblemDims,
                verify_grid: Optional[int] = None) -> RangeReport:
    """Best origin and infinity ranges for the pair ``(V, K)``.

    At the origin the basic range is always computed and the gamma-refined
    region is added when ``r^gamma V`` is bounded below with ``gamma >= p``.
    At infinity likewise with ``gamma <= p``. The widest range at each end is
    kept and the two are combined. ``verify_grid`` cross-checks the exact
    beta optimization on a rational grid with that maximal denominator.
    """
    diagnostics = []
    ends = {}
    for side in (Side.ORIGIN, Side.INFINITY):
        cand = analyze_end(V, K, side, dims)
        rep = EndReport(side, cand)
        if not cand.feasible:
            diagnostics.append(f"K/(r^alpha V^beta) is unbounded near the {side.value} for every beta in [0,1]")
        else:
            if side is Side.ORIGIN:
                fns = {"basic": _parts_origin(dims)}
                if cand.gamma_best is not None:
                    fns["with_gamma"] = _parts_origin_gamma(dims, cand.gamma_best)
            else:
                fns = {"basic": _parts_infinity(dims)}
                if cand.gamma_best is not None:
                    fns["with_gamma"] = _parts_infinity_gamma(dims, cand.gamma_best)
            for name, fn in fns.items():
                res = optimize_over_beta(fn, cand)
                if verify_grid:
                    beta_grid_check(fn, cand, res, verify_grid)
                rep.ranges[name] = res
            _pick(rep)
            if not rep.chosen:
                if side is Side.ORIGIN:
                    diagnostics.append("alpha_0 > alpha_star(beta_0) fails for every admissible beta_0")
                else:
                    diagnostics.append("no admissible profile at infinity")
        ends[side] = rep
    conclusion = combine(ends[Side.ORIGIN].best, ends[Side.INFINITY].best, diagnostics)
    search = "exact" if not verify_grid else f"exact; grid check with denominators <= {verify_grid}"
    return RangeReport(conclusion, ends[Side.ORIGIN], ends[Side.INFINITY], search)


# ---------------------------------------------------------------------------
# integrability of K

def integrable_near(terms, side: Side, weight: Fraction, power: Fraction = Fraction(1)) -> bool:
    """Whether ``(sum of terms)^power * r^weight`` is integrable near ``side``."""
    if not terms:
        return True
    t = dominant_term(terms, side)
    rate = t.rate(side) * power
    if rate != 0:
        return rate < 0
    exponent = t.e * power + weight
    return exponent > -1 if side is Side.ORIGIN else exponent < -1


def is_K_L1_ball(K: PotentialSpec, dims: ProblemDims) -> bool:
    """``K(|x|)`` integrable on the unit ball."""
    return integrable_near(K.end_terms(Side.ORIGIN), Side.ORIGIN, Fraction(dims.N - 1))


def is_K_L1_global(K: PotentialSpec, dims: ProblemDims) -> bool:
    """``K(|x|)`` integrable on the whole space."""
    return is_K_L1_ball(K, dims) and integrable_near(K.end_terms(Side.INFINITY), Side.INFINITY,
                                                     Fraction(dims.N - 1))

"""Exact exponent calculus for weighted radial embeddings.

Every function works on :class:`ExtendedRational` values. The standing
assumption throughout is ``1 < p < N``. Names used below:

* ``alpha_star(beta)``: the smallest admissible weight exponent at the origin;
* ``q_star_upper(alpha, beta)``: the critical exponent for a bound on K/(r^alpha V^beta);
* ``q_lower_star`` / ``q_double_star``: thresholds that appear once a lower
  bound ``r^gamma V >= c`` is available;
* the admissible region for ``(alpha, q)`` near the origin given such a bound,
  split in five cases according to where ``gamma`` sits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .extended import INF, NEG_INF, ONE, ZERO, ExtendedRational, RationalLike, emax, emin, ext


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class UndefinedExponent(DomainError):
    """A threshold has a vanishing denominator at the requested gamma."""


class HypothesisViolation(ValueError):
    """A theorem hypothesis fails; carries the violated inequality."""

    def __init__(self, inequality: str, threshold: ExtendedRational, value: ExtendedRational):
        self.inequality = inequality
        self.threshold = threshold
        self.value = value
        super().__init__(f"hypothesis violated: {inequality} (value {value}, threshold {threshold})")


class Side(str, enum.Enum):
    ORIGIN = "origin"
    INFINITY = "infinity"


@dataclass(frozen=True)
class ProblemDims:
    """Exponent ``p`` and dimension ``N`` with ``1 < p < N``."""

    p: ExtendedRational
    N: int

    def __init__(self, p: RationalLike, N: int):
        p = ext(p)
        if isinstance(N, bool) or not isinstance(N, int) or N < 1:
            raise DomainError(f"N must be a positive integer, got {N!r}")
        if not p.is_finite or not (ONE < p < N):
            raise DomainError(f"need 1 < p < N, got p={p}, N={N}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "N", N)

    @property
    def sobolev_exponent(self) -> ExtendedRational:
        return self.p * self.N / (self.N - self.p)

    @property
    def gamma_critical(self) -> ExtendedRational:
        """The value ``p(N-1)/(p-1)`` where the second threshold degenerates."""
        p = self.p
        return p * (self.N - 1) / (p - 1)


@dataclass(frozen=True)
class AsymptoticProfile:
    """Exponents describing K and V near one end of the half-line."""

    side: Side
    alpha: ExtendedRational
    beta: ExtendedRational
    gamma: Optional[ExtendedRational] = None

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "alpha", ext(self.alpha))
        object.__setattr__(self, "beta", ext(self.beta))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", ext(self.gamma))
        if not self.alpha.is_finite:
            raise DomainError("profile alpha must be finite")
        if self.beta > 1:
            raise DomainError(f"beta must be <= 1, got {self.beta}")

    def check_gamma(self, dims: ProblemDims) -> None:
        if self.gamma is None:
            return
        if self.side is Side.ORIGIN and self.gamma < dims.p:
            raise DomainError(f"at the origin gamma must be >= p, got {self.gamma}")
        if self.side is Side.INFINITY and self.gamma > dims.p:
            raise DomainError(f"at infinity gamma must be <= p, got {self.gamma}")


@dataclass(frozen=True)
class ExponentSet:
    """Open interval ``(lower, upper)``; empty when ``lower >= upper``."""

    lower: ExtendedRational
    upper: ExtendedRational

    def __post_init__(self):
        object.__setattr__(self, "lower", ext(self.lower))
        object.__setattr__(self, "upper", ext(self.upper))

    @classmethod
    def empty(cls) -> "ExponentSet":
        return cls(ONE, ONE)

    @property
    def is_empty(self) -> bool:
        return self.lower >= self.upper

    def contains(self, q: RationalLike) -> bool:
        q = ext(q)
        return self.lower < q < self.upper

    def intersect(self, other: "ExponentSet") -> "ExponentSet":
        return ExponentSet(emax(self.lower, other.lower), emin(self.upper, other.upper))

    def to_dict(self) -> dict:
        return {"lower": str(self.lower), "upper": str(self.upper), "empty": self.is_empty}

    def __str__(self) -> str:
        return "empty" if self.is_empty else f"({self.lower}, {self.upper})"


@dataclass(frozen=True)
class EmbeddingConclusion:
    """Outcome of combining the origin and infinity ranges.

    ``kind`` is ``"sum"`` when only the sum space statement is available,
    ``"single"`` when the two ranges overlap, and ``"none"`` otherwise.
    """

    q1set: ExponentSet
    q2set: ExponentSet
    qset: Optional[ExponentSet]
    compact: bool
    diagnostics: tuple = field(default_factory=tuple)

    @property
    def kind(self) -> str:
        if self.q1set.is_empty or self.q2set.is_empty:
            return "none"
        return "single" if self.qset is not None else "sum"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "compact": self.compact,
            "q1set": self.q1set.to_dict(),
            "q2set": self.q2set.to_dict(),
            "qset": None if self.qset is None else self.qset.to_dict(),
            "diagnostics": list(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# closed-form exponents

def _check_beta_unit(beta: ExtendedRational) -> None:
    if not (ZERO <= beta <= ONE):
        raise DomainError(f"beta must lie in [0, 1], got {beta}")


def alpha_star(beta: RationalLike, dims: ProblemDims) -> ExtendedRational:
    """Lower admissibility bound for the weight exponent at the origin."""
    beta = ext(beta)
    _check_beta_unit(beta)
    p, N = dims.p, dims.N
    return emax(p * beta - 1 - (p - 1) * N / p, -(1 - beta) * N)


def q_star_upper(alpha: RationalLike, beta: RationalLike, dims: ProblemDims) -> ExtendedRational:
    """``p(alpha - p beta + N)/(N - p)``; infinite alpha gives the matching infinity."""
    alpha, beta = ext(alpha), ext(beta)
    p, N = dims.p, dims.N
    return p * (alpha - p * beta + N) / (N - p)


def q_lower_star(alpha: RationalLike, beta: RationalLike, gamma: RationalLike,
                 dims: ProblemDims) -> ExtendedRational:
    """``p(alpha - gamma beta + N)/(N - gamma)``, undefined at ``gamma = N``."""
    alpha, beta, gamma = ext(alpha), ext(beta), ext(gamma)
    p, N = dims.p, dims.N
    if gamma == N:
        raise UndefinedExponent(f"q_lower_star is undefined at gamma = N = {N}")
    return p * (alpha - gamma * beta + N) / (N - gamma)


def q_double_star(alpha: RationalLike, beta: RationalLike, gamma: RationalLike,
                  dims: ProblemDims) -> ExtendedRational:
    """``p(p alpha + (1 - p beta) gamma + p(N-1)) / (p(N-1) - gamma(p-1))``."""
    alpha, beta, gamma = ext(alpha), ext(beta), ext(gamma)
    p, N = dims.p, dims.N
    denom = p * (N - 1) - gamma * (p - 1)
    if denom == 0:
        raise UndefinedExponent(f"q_double_star is undefined at gamma = {gamma}")
    return p * (p * alpha + (1 - p * beta) * gamma + p * (N - 1)) / denom


def alpha_thresholds(beta: RationalLike, gamma: RationalLike, dims: ProblemDims):
    """The three alpha breakpoints ``(alpha_1, alpha_2, alpha_3)``."""
    beta, gamma = ext(beta), ext(gamma)
    p, N = dims.p, dims.N
    a1 = -(1 - beta) * gamma
    a2 = -(1 - beta) * N
    a3 = -((p - 1) * N + (1 - p * beta) * gamma) / p
    return a1, a2, a3


def max_threshold_infinity(alpha: RationalLike, beta: RationalLike,
                           dims: ProblemDims) -> ExtendedRational:
    """``max{1, p beta, q_star_upper}``, cross-checked against its piecewise form."""
    alpha, beta = ext(alpha), ext(beta)
    _check_beta_unit(beta)
    p = dims.p
    direct = emax(ONE, p * beta, q_star_upper(alpha, beta, dims))
    piecewise = q_star_upper(alpha, beta, dims) if alpha >= alpha_star(beta, dims) else emax(ONE, p * beta)
    if direct != piecewise:
        raise AssertionError(f"threshold forms disagree at alpha={alpha}, beta={beta}")
    return direct


def max_threshold_infinity_with_gamma(alpha: RationalLike, beta: RationalLike,
                                      gamma: RationalLike, dims: ProblemDims) -> ExtendedRational:
    """Direct value of ``max{1, p beta, q_lower_star, q_double_star}``.

    Defined for ``beta <= 1`` and ``gamma < N``. For ``gamma <= p`` the
    piecewise description in terms of ``alpha_thresholds`` is evaluated too
    and must agree; for ``p < gamma < N`` that description does not hold
    (e.g. p=2, N=3, beta=0, gamma=5/2, alpha=0 gives q_double_star=26/3 while
    q_lower_star=12), so only the direct maximum is returned.
    """
    alpha, beta, gamma = ext(alpha), ext(beta), ext(gamma)
    p, N = dims.p, dims.N
    if beta > 1:
        raise DomainError(f"beta must be <= 1, got {beta}")
    if gamma >= N:
        raise DomainError(f"gamma must be < N here, got {gamma}")
    base = emax(ONE, p * beta)
    direct = emax(base, q_lower_star(alpha, beta, gamma, dims), q_double_star(alpha, beta, gamma, dims))
    if gamma > p:
        return direct
    a1, a2, a3 = alpha_thresholds(beta, gamma, dims)
    if alpha >= a1:
        piecewise = q_double_star(alpha, beta, gamma, dims)
    elif alpha >= emax(a2, a3):
        piecewise = q_lower_star(alpha, beta, gamma, dims)
    else:
        piecewise = base
    if direct != piecewise:
        raise AssertionError(f"threshold forms disagree at alpha={alpha}, beta={beta}, gamma={gamma}")
    return direct


# ---------------------------------------------------------------------------
# the admissible region near the origin

def _region_case(gamma: ExtendedRational, dims: ProblemDims) -> int:
    N, gc = dims.N, dims.gamma_critical
    if gamma < dims.p:
        raise DomainError(f"region needs gamma >= p, got {gamma}")
    if not gamma.is_finite:
        return 6
    if gamma < N:
        return 1
    if gamma == N:
        return 2
    if gamma < gc:
        return 3
    if gamma == gc:
        return 4
    return 5


def region_membership(alpha: RationalLike, q: RationalLike, beta: RationalLike,
                      gamma: RationalLike, dims: ProblemDims) -> bool:
    """Strict membership of ``(alpha, q)`` in the region attached to ``(beta, gamma)``.

    ``gamma = +inf`` is the limit of the nested family and reduces to
    ``q > max{1, p beta}``.
    """
    alpha, q, beta, gamma = ext(alpha), ext(q), ext(beta), ext(gamma)
    if beta > 1:
        raise DomainError(f"beta must be <= 1, got {beta}")
    p, N = dims.p, dims.N
    base = emax(ONE, p * beta)
    case = _region_case(gamma, dims)
    if case == 6:
        return q > base
    if case == 1:
        return base < q < emin(q_lower_star(alpha, beta, gamma, dims), q_double_star(alpha, beta, gamma, dims))
    if case == 2:
        return alpha > -(1 - beta) * N and base < q < q_double_star(alpha, beta, gamma, dims)
    if case == 3:
        return emax(base, q_lower_star(alpha, beta, gamma, dims)) < q < q_double_star(alpha, beta, gamma, dims)
    if case == 4:
        return alpha > -(1 - beta) * gamma and q > emax(base, q_lower_star(alpha, beta, gamma, dims))
    return q > emax(base, q_lower_star(alpha, beta, gamma, dims), q_double_star(alpha, beta, gamma, dims))


def region_slice_parts(alpha: ExtendedRational, beta: ExtendedRational,
                       gamma: ExtendedRational, dims: ProblemDims):
    """Pieces of the q-slice of the region at fixed alpha.

    Returns ``(lowers, uppers, slacks)``: the slice is
    ``max(lowers) < q < min(uppers)`` provided every slack is positive.
    Alpha may be infinite; gamma may be ``+inf``.
    """
    alpha, beta, gamma = ext(alpha), ext(beta), ext(gamma)
    p, N = dims.p, dims.N
    lowers = [ONE, p * beta]
    case = _region_case(gamma, dims)
    if case == 6:
        return lowers, [INF], []
    if case == 1:
        return lowers, [q_lower_star(alpha, beta, gamma, dims), q_double_star(alpha, beta, gamma, dims)], []
    if case == 2:
        return lowers, [q_double_star(alpha, beta, gamma, dims)], [alpha + (1 - beta) * N]
    if case == 3:
        return lowers + [q_lower_star(alpha, beta, gamma, dims)], [q_double_star(alpha, beta, gamma, dims)], []
    if case == 4:
        return lowers + [q_lower_star(alpha, beta, gamma, dims)], [INF], [alpha + (1 - beta) * gamma]
    return (lowers + [q_lower_star(alpha, beta, gamma, dims), q_double_star(alpha, beta, gamma, dims)],
            [INF], [])


def interval_from_parts(lowers, uppers, slacks) -> ExponentSet:
    if any(s <= 0 for s in slacks):
        return ExponentSet.empty()
    result = ExponentSet(max(lowers), min(uppers))
    return ExponentSet.empty() if result.is_empty else result


# ---------------------------------------------------------------------------
# ranges from asymptotic profiles

def normalize_beta(profile: AsymptoticProfile) -> AsymptoticProfile:
    """Trade a negative beta for a shifted alpha: ``(alpha - beta gamma, 0)``."""
    if profile.beta >= 0:
        return profile
    if profile.gamma is None:
        raise DomainError("a negative beta can only be normalized when gamma is given")
    return replace(profile, alpha=profile.alpha - profile.beta * profile.gamma, beta=ZERO)


def q1_range_origin(profile: AsymptoticProfile, dims: ProblemDims) -> ExponentSet:
    """Range ``(max{1, p beta}, q_star_upper)`` at the origin without a V lower bound."""
    if profile.side is not Side.ORIGIN:
        raise DomainError("profile must describe the origin")
    beta = profile.beta
    _check_beta_unit(beta)
    threshold = alpha_star(beta, dims)
    if not profile.alpha > threshold:
        raise HypothesisViolation("alpha_0 > alpha_star(beta_0)", threshold, profile.alpha)
    return ExponentSet(emax(ONE, dims.p * beta), q_star_upper(profile.alpha, beta, dims))


def q2_range_infinity(profile: AsymptoticProfile, dims: ProblemDims) -> ExponentSet:
    """Half-line above ``max{1, p beta, q_star_upper}`` at infinity."""
    if profile.side is not Side.INFINITY:
        raise DomainError("profile must describe infinity")
    return ExponentSet(max_threshold_infinity(profile.alpha, profile.beta, dims), INF)


def q2_range_infinity_with_gamma(profile: AsymptoticProfile, dims: ProblemDims) -> ExponentSet:
    """Half-line at infinity when ``r^gamma V`` is bounded below with ``gamma <= p``."""
    if profile.side is not Side.INFINITY:
        raise DomainError("profile must describe infinity")
    if profile.gamma is None:
        raise DomainError("gamma is required for this range")
    profile.check_gamma(dims)
    prof = normalize_beta(profile)
    return ExponentSet(max_threshold_infinity_with_gamma(prof.alpha, prof.beta, prof.gamma, dims), INF)


def q1_set_origin_with_gamma(profile: AsymptoticProfile, dims: ProblemDims) -> ExponentSet:
    """The q-slice of the region at the origin, as one open interval.

    The interval is computed per case; 32 sampled exponents are then checked
    against :func:`region_membership` as a redundancy guard.
    """
    if profile.side is not Side.ORIGIN:
        raise DomainError("profile must describe the origin")
    if profile.gamma is None:
        raise DomainError("gamma is required for this range")
    profile.check_gamma(dims)
    prof = normalize_beta(profile)
    result = interval_from_parts(*region_slice_parts(prof.alpha, prof.beta, prof.gamma, dims))
    for q in _probe_points(result):
        inside = region_membership(prof.alpha, q, prof.beta, prof.gamma, dims)
        if inside != result.contains(q):
            raise AssertionError(f"slice {result} disagrees with membership at q={q}")
    return result


def _probe_points(interval: ExponentSet, count: int = 32):
    lo = interval.lower if interval.lower.is_finite else None
    hi = interval.upper if interval.upper.is_finite else None
    if lo is None and hi is None:
        lo, hi = ext(-8), ext(8)
    elif lo is None:
        lo = hi - 8
    elif hi is None:
        hi = lo + 8
    if hi < lo:
        lo, hi = hi, lo
    span = hi - lo if hi > lo else ONE
    pts = [lo - span * Fraction(1, 4) + span * Fraction(3, 2) * Fraction(k, count - 5) for k in range(count - 4)]
    pts += [lo, hi, lo + span * Fraction(1, 10**6), hi - span * Fraction(1, 10**6)]
    return pts


def combine(q1set: ExponentSet, q2set: ExponentSet, diagnostics=()) -> EmbeddingConclusion:
    """Merge the origin and infinity ranges into one conclusion."""
    diagnostics = tuple(diagnostics)
    if q1set.is_empty or q2set.is_empty:
        extra = []
        if q1set.is_empty:
            extra.append("no admissible exponent range at the origin")
        if q2set.is_empty:
            extra.append("no admissible exponent range at infinity")
        return EmbeddingConclusion(q1set, q2set, None, False, diagnostics + tuple(extra))
    both = q1set.intersect(q2set)
    return EmbeddingConclusion(q1set, q2set, None if both.is_empty else both, True, diagnostics)


# ---------------------------------------------------------------------------
# comparison for pure power potentials r^a with a strongly singular exponent

@dataclass(frozen=True)
class PowerComparison:
    b1: ExtendedRational
    b2: ExtendedRational
    b3: ExtendedRational
    q_low_prior: Optional[ExtendedRational]
    q_high_prior: Optional[ExtendedRational]
    q_low_ours: ExtendedRational
    q_high_ours: ExtendedRational
    range_ours: ExponentSet
    range_nonempty_condition: bool
    range_power_growth: ExponentSet

    @property
    def prior_defined(self) -> bool:
        return self.q_low_prior is not None and self.q_high_prior is not None

    def to_dict(self) -> dict:
        s = lambda v: None if v is None else str(v)
        return {
            "b1": s(self.b1), "b2": s(self.b2), "b3": s(self.b3),
            "q_low_prior": s(self.q_low_prior), "q_high_prior": s(self.q_high_prior),
            "q_low_ours": s(self.q_low_ours), "q_high_ours": s(self.q_high_ours),
            "range_ours": self.range_ours.to_dict(),
            "range_nonempty_condition": self.range_nonempty_condition,
            "range_power_growth": self.range_power_growth.to_dict(),
        }


def power_potential_comparison(a: RationalLike, b: RationalLike, b0: RationalLike,
                               dims: ProblemDims) -> PowerComparison:
    """Compare ranges for ``V = r^a`` and ``K ~ r^b0`` at 0, ``K ~ r^b`` at infinity.

    ``a`` must lie in ``(-p(N-1)/(p-1), -N)``. The ``prior`` endpoints are the
    older power-weight bounds, defined only on sub-intervals of b and b0.
    """
    a, b, b0 = ext(a), ext(b), ext(b0)
    p, N = dims.p, dims.N
    if not (-dims.gamma_critical < a < -N):
        raise DomainError(f"need -p(N-1)/(p-1) < a < -N, got a={a}")
    if not b0 > a:
        raise DomainError(f"need b0 > a, got b0={b0}, a={a}")
    d = p * (N - 1) + a * (p - 1)
    b1 = d / (p * p) - N
    b2 = d / p - N
    b3 = (N - p) / p - N

    q_low_prior = None
    if b3 <= b < -p:
        q_low_prior = p * (N + b) / (N - p)
    elif b1 <= b < b2:
        q_low_prior = p * p * (N + b) / d
    q_high_prior = None
    if b3 < b0 <= -p:
        q_high_prior = p * (N + b0) / (N - p)
    elif b1 < b0 <= b2:
        q_high_prior = p * p * (N + b0) / d

    q_low_ours = emax(ONE, p * (N + b0) / (N + a), p * (N + b) / (N - p))
    q_high_ours = p * (p * (N - 1) + p * b0 - a) / d
    condition = p * (N + b) / (N - p) < q_high_ours
    return PowerComparison(
        b1, b2, b3, q_low_prior, q_high_prior, q_low_ours, q_high_ours,
        ExponentSet(q_low_ours, q_high_ours), condition,
        ExponentSet(emax(p, p * (N + b) / (N - p)), q_high_ours),
    )

"""Worked examples: closed-form ranges next to the catalog's computed ranges.

Each function builds the example's potentials, runs ``best_ranges`` on them
and compares the result with the closed-form statement of the example. The
identifiers ``"3.1"`` to ``"3.5"`` and ``"4.2"`` are kept as the public
names of these configurations.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .catalog import best_ranges
from .exponents import (DomainError, ExponentSet, ProblemDims, power_potential_comparison)
from .extended import INF, ONE, emax, ext
from .potentials import Piece, PotentialSpec, Term, parse_potential


def _power_pair(b0, b) -> PotentialSpec:
    """``r^b0`` on ``(0, 1]`` and ``r^b`` beyond, continuous at 1."""
    one = Fraction(1)
    return PotentialSpec((Piece(Fraction(0), ext(one), (Term(one, Fraction(b0)),)),
                          Piece(one, INF, (Term(one, Fraction(b)),))),
                         source=f"piecewise[(0,1): r^({b0}); (1,inf): r^({b})]")


def _report(example_id, params, V, K, dims, stated: dict) -> dict:
    computed = best_ranges(V, K, dims)
    c = computed.conclusion
    got = {"kind": c.kind, "q1set": str(c.q1set), "q2set": str(c.q2set),
           "qset": None if c.qset is None else str(c.qset)}
    want = {k: (str(v) if isinstance(v, ExponentSet) else v) for k, v in stated.items()}
    match = all(got.get(k) == v for k, v in want.items())
    return {"id": example_id, "params": {k: str(v) for k, v in params.items()},
            "V": V.text, "K": K.text, "stated": want, "computed": got, "match": match,
            "report": computed.to_dict()}


def _require(condition: bool, text: str) -> None:
    if not condition:
        raise DomainError(f"parameters violate the example's condition: {text}")


def example_3_1(a=1, p=2, N=3) -> dict:
    """``V = r^-a``, ``K = r^(1-a)`` with ``a <= p``."""
    dims = ProblemDims(p, N)
    a = Fraction(a)
    p, N = dims.p.fraction, dims.N
    _require(a <= p, "a <= p")
    V = PotentialSpec.power(-a)
    K = PotentialSpec.power(1 - a)
    upper = p * (N - a + 1) / (N - p)
    lower = p * (p * N - a * (p - 1)) / (p * (N - 1) - a * (p - 1))
    if a < p:
        stated = {"kind": "single", "qset": ExponentSet(lower, upper)}
    else:
        stated = {"kind": "sum", "q1set": ExponentSet(ONE, upper), "q2set": ExponentSet(lower, INF)}
    return _report("3.1", {"a": a, "p": p, "N": N}, V, K, dims, stated)


def example_3_2(d=0, p=2, N=3) -> dict:
    """``V = 0``, ``K = r^d``."""
    dims = ProblemDims(p, N)
    d = Fraction(d)
    p, N = dims.p.fraction, dims.N
    _require(d > -1 - N * (p - 1) / p, "d > -1 - N(p-1)/p")
    t = p * (d + N) / (N - p)
    stated = {"kind": "sum", "q1set": ExponentSet(ONE, t), "q2set": ExponentSet(emax(ONE, ext(t)), INF)}
    return _report("3.2", {"d": d, "p": p, "N": N}, PotentialSpec.zero(), PotentialSpec.power(d), dims, stated)


def example_3_3(a=1, b=1, d=0, variant="K2", p=2, N=3) -> dict:
    """``V = exp(-a r)`` with ``K1 = r^d`` or ``K2 = r^d exp(-b r)``."""
    dims = ProblemDims(p, N)
    a, b, d = Fraction(a), Fraction(b), Fraction(d)
    p, N = dims.p.fraction, dims.N
    _require(a > 0 and b > 0, "a, b > 0")
    _require(d > -1 - (p - 1) * N / p, "d > -1 - (p-1)N/p")
    V = PotentialSpec.single([Term(ONE.fraction, Fraction(0), -a)])
    t = p * (d + N) / (N - p)
    if variant == "K1":
        K = PotentialSpec.power(d)
        stated = {"kind": "sum", "q1set": ExponentSet(ONE, t), "q2set": ExponentSet(t, INF)}
    elif variant == "K2":
        K = PotentialSpec.single([Term(Fraction(1), d, -b)])
        stated = {"kind": "single", "qset": ExponentSet(ONE, t)}
    else:
        raise DomainError(f"variant must be K1 or K2, got {variant!r}")
    return _report("3.3", {"a": a, "b": b, "d": d, "variant": variant, "p": p, "N": N}, V, K, dims, stated)


def example_3_4(b=Fraction(1, 2), variant="V", p=2, N=3) -> dict:
    """``V = exp(1/r)``, ``K = exp(b/r)`` and the two modified potentials."""
    dims = ProblemDims(p, N)
    b = Fraction(b)
    p, N = dims.p.fraction, dims.N
    _require(0 < b <= 1, "0 < b <= 1")
    K = PotentialSpec.single([Term(Fraction(1), Fraction(0), Fraction(0), b)])
    if variant == "V":
        V = parse_potential("exp(1/r)")
        stated = {"kind": "single", "qset": ExponentSet(p, INF)}
    elif variant == "V1":
        V = parse_potential("piecewise[(0,1): exp(1/r); (1,inf): 0]")
        stated = {"kind": "single", "qset": ExponentSet(dims.sobolev_exponent, INF)}
    elif variant == "V2":
        V = parse_potential(f"asym[0: exp(1/r); inf: r^{N}]")
        stated = {"kind": "single", "qset": ExponentSet(max(Fraction(1), p * b), INF)}
    else:
        raise DomainError(f"variant must be V, V1 or V2, got {variant!r}")
    return _report("3.4", {"b": b, "variant": variant, "p": p, "N": N}, V, K, dims, stated)


def example_3_5(a=Fraction(-7, 2), b=Fraction(-5, 2), b0=Fraction(-3, 2), p=2, N=3) -> dict:
    """``V = r^a`` with ``-p(N-1)/(p-1) < a < -N`` and ``K ~ r^b0`` at 0, ``r^b`` at infinity."""
    dims = ProblemDims(p, N)
    cmp = power_potential_comparison(a, b, b0, dims)
    V = PotentialSpec.power(a)
    K = _power_pair(b0, b)
    p_, N_ = dims.p.fraction, dims.N
    q2_low = emax(ONE, ext(p_ * (N_ + Fraction(b)) / (N_ - p_)))
    q1 = ExponentSet(emax(ONE, ext(p_ * (N_ + Fraction(b0)) / (N_ + Fraction(a)))), cmp.q_high_ours)
    stated = {"q1set": q1, "q2set": ExponentSet(q2_low, INF)}
    out = _report("3.5", {"a": a, "b": b, "b0": b0, "p": p_, "N": N_}, V, K, dims, stated)
    out["comparison"] = cmp.to_dict()
    wider = None
    if cmp.prior_defined:
        # the toolkit range must contain the earlier one, with a strictly larger top
        ours = cmp.range_ours
        wider = bool(ours.lower <= cmp.q_low_prior and cmp.q_high_prior < ours.upper)
        if not wider:
            raise AssertionError(f"range {ours} does not extend ({cmp.q_low_prior}, {cmp.q_high_prior})")
    out["wider_than_prior"] = wider
    return out


def example_4_2(a=1, b0=-1, b=Fraction(-5, 2), p=2, N=3, q: Optional[Fraction] = None) -> dict:
    """``V = exp(-a r) / r^N``, ``K ~ r^b0`` at 0 and ``r^b`` at infinity.

    Reports the exponent ranges, which existence route applies to ``q`` when
    given, and the double-power fallback when no single exponent works.
    """
    dims = ProblemDims(p, N)
    a, b0, b = Fraction(a), Fraction(b0), Fraction(b)
    p, N = dims.p.fraction, dims.N
    _require(a > 0, "a > 0")
    _require(b0 > -N, "b0 > -N")
    V = PotentialSpec.single([Term(Fraction(1), Fraction(-N), -a)])
    K = _power_pair(b0, b)
    q_bar = p * (1 + (N + b0) / (N - p) * p)
    q_low = max(Fraction(1), p * (N + b) / (N - p))
    stated = {"q1set": ExponentSet(ONE, q_bar), "q2set": ExponentSet(q_low, INF)}
    out = _report("4.2", {"a": a, "b0": b0, "b": b, "p": p, "N": N}, V, K, dims, stated)
    routes = {}
    if b < p * (N + b0 - 1):
        routes["mountain_pass"] = str(ExponentSet(max(p, p * (N + b) / (N - p)), q_bar))
    if b < -p:
        routes["minimization"] = str(ExponentSet(q_low, p))
    out["single_exponent_routes"] = routes
    if b >= p * (N + b0 - 1):
        out["fallback"] = {
            "message": "no single-space range; sum-space only",
            "nonlinearity": "min_power or rational_power with q1 and q2 below",
            "q1": str(ExponentSet(p, q_bar)), "q2": str(ExponentSet(q_low, INF)),
        }
    if q is not None:
        q = Fraction(q)
        route = None
        if "mountain_pass" in routes and max(p, p * (N + b) / (N - p)) < q < q_bar:
            route = "mountain_pass"
        elif "minimization" in routes and q_low < q < p:
            route = "minimization"
        out["q"] = str(q)
        out["route"] = route
    return out


EXAMPLES = {
    "3.1": example_3_1,
    "3.2": example_3_2,
    "3.3": example_3_3,
    "3.4": example_3_4,
    "3.5": example_3_5,
    "4.2": example_4_2,
}


def run_example(example_id: str, **params) -> dict:
    try:
        fn = EXAMPLES[example_id]
    except KeyError:
        raise DomainError(f"unknown example {example_id!r}; choose from {sorted(EXAMPLES)}") from None
    return fn(**params)

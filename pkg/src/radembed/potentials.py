"""Radial potentials built from power-times-exponential terms.

A term is ``c * r^e * exp(s_inf * r) * exp(s_zero / r)`` with exact rational
``c > 0``, ``e``, ``s_inf`` and ``s_zero``. A potential is a sum of terms on
each piece of a partition of ``(0, inf)``. Text syntax::

    r^-2
    exp(-3r)*r^2
    2/3*exp(1/r) + r^-1
    piecewise[(0,1): r^-1; (1,inf): 0]
    asym[0: exp(1/r); inf: r^3]

``asym`` declares only how the potential behaves near each end. It is
analyzed through those two terms and evaluated numerically as the piecewise
potential that switches at ``r = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import integrate

from .exponents import Side
from .extended import INF, ExtendedRational, ext


class PotentialParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        self.position = position
        self.text = text
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {pointer}")


@dataclass(frozen=True)
class Term:
    c: Fraction
    e: Fraction = Fraction(0)
    s_inf: Fraction = Fraction(0)
    s_zero: Fraction = Fraction(0)

    def rate(self, side: Side) -> Fraction:
        """Exponential rate that matters at ``side``."""
        return self.s_zero if side is Side.ORIGIN else self.s_inf

    def log_value(self, r: np.ndarray) -> np.ndarray:
        return (math.log(self.c) + float(self.e) * np.log(r)
                + float(self.s_inf) * r + float(self.s_zero) / r)

    def __str__(self) -> str:
        parts = []
        if self.c != 1 or (self.e == 0 and self.s_inf == 0 and self.s_zero == 0):
            parts.append(str(self.c))
        if self.e != 0:
            parts.append(f"r^{self.e}" if self.e > 0 else f"r^({self.e})")
        if self.s_inf != 0:
            parts.append(f"exp({self.s_inf}*r)")
        if self.s_zero != 0:
            parts.append(f"exp({self.s_zero}/r)")
        return "*".join(parts)


def dominant_term(terms, side: Side) -> Term:
    """Term that dominates the sum as ``r -> 0`` or ``r -> inf``.

    Exponential rates are compared first, then power exponents. All
    coefficients are positive, so the sum is comparable to this term.
    """
    if side is Side.ORIGIN:
        return max(terms, key=lambda t: (t.s_zero, -t.e))
    return max(terms, key=lambda t: (t.s_inf, t.e))


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: ExtendedRational
    terms: tuple

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        body = " + ".join(str(t) for t in self.terms) or "0"
        return f"({self.lo},{self.hi}): {body}"


@dataclass(frozen=True)
class PotentialSpec:
    pieces: tuple
    markers: Optional[dict] = field(default=None, hash=False, compare=False)
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("a potential needs at least one piece")
        if self.pieces[0].lo != 0 or self.pieces[-1].hi != INF:
            raise ValueError("pieces must cover (0, inf)")
        for left, right in zip(self.pieces, self.pieces[1:]):
            if ext(left.hi) != right.lo:
                raise ValueError("pieces must be contiguous")
        for piece in self.pieces:
            if not ext(piece.lo) < piece.hi:
                raise ValueError(f"empty piece {piece}")

    # -- constructors --------------------------------------------------------
    @classmethod
    def single(cls, terms) -> "PotentialSpec":
        return cls((Piece(Fraction(0), INF, tuple(terms)),))

    @classmethod
    def power(cls, e, c=1) -> "PotentialSpec":
        return cls.single([Term(Fraction(c), Fraction(e))])

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls.single([])

    # -- structure -------------------------------------------------------------
    def end_terms(self, side: Side) -> tuple:
        if self.markers and side in self.markers:
            return self.markers[side]
        return self.pieces[0].terms if side is Side.ORIGIN else self.pieces[-1].terms

    def is_zero_near(self, side: Side) -> bool:
        return not self.end_terms(side)

    @property
    def zero_outside(self) -> bool:
        """True when the potential vanishes near infinity (compact support)."""
        return self.pieces[-1].is_zero and len(self.pieces) > 1

    @property
    def has_zero_piece(self) -> bool:
        return any(piece.is_zero for piece in self.pieces)

    def scaled(self, factor) -> "PotentialSpec":
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        scale = lambda terms: tuple(Term(t.c * factor, t.e, t.s_inf, t.s_zero) for t in terms)
        pieces = tuple(Piece(pc.lo, pc.hi, scale(pc.terms)) for pc in self.pieces)
        markers = None if self.markers is None else {k: scale(v) for k, v in self.markers.items()}
        return PotentialSpec(pieces, markers, f"{factor}*({self.text})")

    @property
    def text(self) -> str:
        return self.source or str(self)

    def __str__(self) -> str:
        if self.markers:
            return f"asym[0: {_sum_str(self.markers[Side.ORIGIN])}; inf: {_sum_str(self.markers[Side.INFINITY])}]"
        if len(self.pieces) == 1:
            return _sum_str(self.pieces[0].terms)
        return "piecewise[" + "; ".join(str(pc) for pc in self.pieces) + "]"

    # -- numerics ---------------------------------------------------------------
    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        his = [float(pc.hi) for pc in self.pieces]
        index = np.searchsorted(np.array(his[:-1]), r, side="left")
        with np.errstate(over="ignore"):
            for k, piece in enumerate(self.pieces):
                mask = index == k
                if not mask.any() or piece.is_zero:
                    continue
                rk = r[mask]
                out[mask] = sum(np.exp(t.log_value(rk)) for t in piece.terms)
        return out

    def moment_near_zero(self, r0: float, N: int) -> float:
        """``int_0^r0 P(r) r^(N-1) dr``; ``inf`` when divergent."""
        for t in self.pieces[0].terms:
            if t.s_zero > 0 or (t.s_zero == 0 and t.e + N <= 0):
                return math.inf
        total = 0.0
        for piece in self.pieces:
            lo = float(piece.lo)
            if lo >= r0:
                break
            hi = min(float(piece.hi), r0)
            a = -math.inf if lo == 0 else math.log(lo)
            for t in piece.terms:
                def integrand(s, t=t):
                    # work in s = log r so that quad's far-left samples never hit r = 0
                    log_v = math.log(t.c) + (float(t.e) + N) * s
                    if t.s_inf:
                        log_v += float(t.s_inf) * math.exp(s)
                    if t.s_zero:
                        log_v += float(t.s_zero) * math.exp(min(-s, 700.0))
                    return math.exp(log_v) if log_v > -745 else 0.0
                value, _ = integrate.quad(integrand, a, math.log(hi), limit=200)
                total += value
        return total


def _sum_str(terms) -> str:
    return " + ".join(str(t) for t in terms) or "0"


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise PotentialParseError(message, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, token: str) -> bool:
        self.skip()
        return self.text.startswith(token, self.pos)

    def accept(self, token: str) -> bool:
        if self.peek(token):
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str):
        if not self.accept(token):
            self.error(f"expected {token!r}")

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def number(self) -> Fraction:
        self.skip()
        start = self.pos
        text = self.text
        while self.pos < len(text) and text[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(text) and text[self.pos] == ".":
            self.pos += 1
            while self.pos < len(text) and text[self.pos].isdigit():
                self.pos += 1
        if self.pos == start:
            self.error("expected a number")
        literal = text[start:self.pos]
        if self.pos + 1 < len(text) and text[self.pos] == "/" and text[self.pos + 1].isdigit():
            self.pos += 1
            dstart = self.pos
            while self.pos < len(text) and text[self.pos].isdigit():
                self.pos += 1
            literal += "/" + text[dstart:self.pos]
        try:
            return Fraction(literal)
        except ZeroDivisionError:
            self.pos = start
            self.error("zero denominator")

    def signed_number(self) -> Fraction:
        if self.accept("-"):
            return -self.number()
        self.accept("+")
        return self.number()

    def spec(self) -> PotentialSpec:
        if self.accept("piecewise"):
            spec = self.piecewise()
        elif self.accept("asym"):
            spec = self.asym()
        else:
            spec = PotentialSpec.single(self.sum())
        if not self.at_end():
            self.error("unexpected trailing input")
        return PotentialSpec(spec.pieces, spec.markers, self.text.strip())

    def bound(self):
        if self.accept("inf"):
            return INF
        return ext(self.number())

    def piecewise(self) -> PotentialSpec:
        self.expect("[")
        pieces = []
        while True:
            self.expect("(")
            at = self.pos
            lo = self.bound()
            self.expect(",")
            hi = self.bound()
            self.expect(")")
            self.expect(":")
            terms = self.sum()
            if not lo < hi:
                self.pos = at
                self.error("piece bounds must increase")
            pieces.append(Piece(lo.fraction, hi, terms))
            if not self.accept(";"):
                break
        self.expect("]")
        try:
            return PotentialSpec(tuple(pieces))
        except ValueError as exc:
            self.error(str(exc))

    def asym(self) -> PotentialSpec:
        self.expect("[")
        self.expect("0")
        self.expect(":")
        near_zero = self.sum()
        self.expect(";")
        self.expect("inf")
        self.expect(":")
        near_inf = self.sum()
        self.expect("]")
        one = Fraction(1)
        pieces = (Piece(Fraction(0), ext(one), near_zero), Piece(one, INF, near_inf))
        return PotentialSpec(pieces, {Side.ORIGIN: near_zero, Side.INFINITY: near_inf})

    def sum(self) -> tuple:
        terms = [self.product()]
        while self.accept("+"):
            terms.append(self.product())
        return tuple(t for t in terms if t is not None)

    def product(self) -> Optional[Term]:
        c, e, s_inf, s_zero = Fraction(1), Fraction(0), Fraction(0), Fraction(0)
        while True:
            self.skip()
            if self.accept("exp"):
                self.expect("(")
                rate, at_zero = self.exp_argument()
                self.expect(")")
                if at_zero:
                    s_zero += rate
                else:
                    s_inf += rate
            elif self.peek("r"):
                self.pos += 1
                if self.accept("^"):
                    if self.accept("("):
                        e += self.signed_number()
                        self.expect(")")
                    else:
                        e += self.signed_number()
                else:
                    e += 1
            else:
                c *= self.number()
            if not self.accept("*"):
                break
        if c == 0:
            return None
        return Term(c, e, s_inf, s_zero)

    def exp_argument(self):
        sign = -1 if self.accept("-") else 1
        self.accept("+")
        self.skip()
        coeff = Fraction(1)
        if self.pos < len(self.text) and self.text[self.pos].isdigit():
            coeff = self.number()
            self.accept("*")
        if self.accept("/"):
            self.expect("r")
            return sign * coeff, True
        self.expect("r")
        return sign * coeff, False


def parse_potential(text: str) -> PotentialSpec:
    """Parse the textual potential syntax described in the module docstring."""
    return _Parser(text).spec()


def as_potential(value) -> PotentialSpec:
    return value if isinstance(value, PotentialSpec) else parse_potential(str(value))

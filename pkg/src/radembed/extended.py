"""Exact rationals extended by the two infinities."""

from __future__ import annotations

import functools
import numbers
from fractions import Fraction
from typing import Union

RationalLike = Union["ExtendedRational", Fraction, int, str]


class ExtendedRationalError(ArithmeticError):
    """Raised for indeterminate forms such as inf - inf or 0 * inf."""


@functools.total_ordering
class ExtendedRational:
    """A rational number, or +inf / -inf.

    Finite values are held as :class:`fractions.Fraction`, so arithmetic on
    them never rounds. Indeterminate forms raise instead of producing NaN.
    """

    __slots__ = ("_value", "_sign")

    def __init__(self, value: RationalLike = 0):
        if isinstance(value, ExtendedRational):
            self._value, self._sign = value._value, value._sign
            return
        if isinstance(value, str):
            text = value.strip().lower()
            if text in ("inf", "+inf", "infinity", "+infinity", "oo"):
                self._value, self._sign = None, 1
                return
            if text in ("-inf", "-infinity", "-oo"):
                self._value, self._sign = None, -1
                return
            try:
                value = Fraction(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"not an exact rational: {value!r}") from exc
        if isinstance(value, bool):
            raise TypeError("booleans are not exponents")
        if isinstance(value, float):
            raise TypeError("floats are not accepted; pass a Fraction or a 'num/den' string")
        if not isinstance(value, numbers.Rational):
            raise TypeError(f"cannot build ExtendedRational from {type(value).__name__}")
        self._value = Fraction(value)
        self._sign = (self._value > 0) - (self._value < 0)

    # -- constructors -------------------------------------------------------
    @classmethod
    def inf(cls) -> "ExtendedRational":
        return cls("inf")

    @classmethod
    def neg_inf(cls) -> "ExtendedRational":
        return cls("-inf")

    # -- inspection ---------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self._value is not None

    @property
    def is_pos_inf(self) -> bool:
        return self._value is None and self._sign > 0

    @property
    def is_neg_inf(self) -> bool:
        return self._value is None and self._sign < 0

    @property
    def sign(self) -> int:
        return self._sign

    @property
    def fraction(self) -> Fraction:
        if self._value is None:
            raise ExtendedRationalError("infinite value has no fraction")
        return self._value

    def __float__(self) -> float:
        if self._value is None:
            return float("inf") * self._sign
        return float(self._value)

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self) -> "ExtendedRational":
        if self._value is None:
            return ExtendedRational("-inf" if self._sign > 0 else "inf")
        return ExtendedRational(-self._value)

    def __pos__(self) -> "ExtendedRational":
        return self

    def __abs__(self) -> "ExtendedRational":
        return -self if self._sign < 0 else self

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_finite and other.is_finite:
            return ExtendedRational(self._value + other._value)
        if not self.is_finite and not other.is_finite and self._sign != other._sign:
            raise ExtendedRationalError("inf - inf is undefined")
        return self if not self.is_finite else other

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_finite and other.is_finite:
            return ExtendedRational(self._value * other._value)
        if self._sign == 0 or other._sign == 0:
            raise ExtendedRationalError("0 * inf is undefined")
        return ExtendedRational("inf" if self._sign * other._sign > 0 else "-inf")

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other._sign == 0:
            raise ZeroDivisionError("division by zero")
        if not other.is_finite:
            if not self.is_finite:
                raise ExtendedRationalError("inf / inf is undefined")
            return ExtendedRational(0)
        if self.is_finite:
            return ExtendedRational(self._value / other._value)
        return ExtendedRational("inf" if self._sign * other._sign > 0 else "-inf")

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    # -- ordering -----------------------------------------------------------
    def _key(self):
        if self._value is None:
            return (self._sign, Fraction(0))
        return (0, self._value)

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self) -> int:
        if self._value is None:
            return hash(("ExtendedRational", self._sign))
        return hash(self._value)

    # -- text ---------------------------------------------------------------
    def __str__(self) -> str:
        if self._value is None:
            return "inf" if self._sign > 0 else "-inf"
        return str(self._value)

    def __repr__(self) -> str:
        return f"ExtendedRational('{self}')"


def _coerce(value) -> ExtendedRational:
    if isinstance(value, ExtendedRational):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return ExtendedRational(value)
    return NotImplemented


def ext(value: RationalLike) -> ExtendedRational:
    """Coerce ints, Fractions and 'num/den' strings to :class:`ExtendedRational`."""
    return value if isinstance(value, ExtendedRational) else ExtendedRational(value)


INF = ExtendedRational("inf")
NEG_INF = ExtendedRational("-inf")
ZERO = ExtendedRational(0)
ONE = ExtendedRational(1)


def emax(*values: RationalLike) -> ExtendedRational:
    return max(ext(v) for v in values)


def emin(*values: RationalLike) -> ExtendedRational:
    return min(ext(v) for v in values)

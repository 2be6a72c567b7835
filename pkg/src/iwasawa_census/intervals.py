"""Closed rational intervals with outward rounding."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction]


def _frac(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def decimal_floor(q: Fraction, digits: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = digits + 40
        return (Decimal(q.numerator) / Decimal(q.denominator)).quantize(
            Decimal(1).scaleb(-digits), rounding=ROUND_FLOOR
        )


def decimal_ceil(q: Fraction, digits: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = digits + 40
        return (Decimal(q.numerator) / Decimal(q.denominator)).quantize(
            Decimal(1).scaleb(-digits), rounding=ROUND_CEILING
        )


@dataclass(frozen=True)
class EulerProductValue:
    """An enclosure [lower, upper] of a real constant."""

    lower: Fraction
    upper: Fraction
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lower", _frac(self.lower))
        object.__setattr__(self, "upper", _frac(self.upper))
        if self.lower > self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    @classmethod
    def exact(cls, q: Number, description: str = "") -> "EulerProductValue":
        return cls(_frac(q), _frac(q), description)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, x: "Number | EulerProductValue") -> bool:
        if isinstance(x, EulerProductValue):
            return self.lower <= x.lower and x.upper <= self.upper
        return self.lower <= x <= self.upper

    def named(self, description: str) -> "EulerProductValue":
        return EulerProductValue(self.lower, self.upper, description)

    def _coerce(self, other) -> "EulerProductValue":
        if isinstance(other, EulerProductValue):
            return other
        return EulerProductValue.exact(other)

    def __add__(self, other):
        o = self._coerce(other)
        return EulerProductValue(self.lower + o.lower, self.upper + o.upper)

    __radd__ = __add__

    def __neg__(self):
        return EulerProductValue(-self.upper, -self.lower)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        ends = [a * b for a in (self.lower, self.upper) for b in (o.lower, o.upper)]
        return EulerProductValue(min(ends), max(ends))

    __rmul__ = __mul__

    def reciprocal(self) -> "EulerProductValue":
        if self.lower <= 0 <= self.upper:
            raise ZeroDivisionError("interval contains zero")
        return EulerProductValue(1 / self.upper, 1 / self.lower)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def is_positive(self) -> bool:
        return self.lower > 0

    def rounded(self, bits: int = 256) -> "EulerProductValue":
        """Outward-round both ends to dyadic rationals with ``bits`` fractional bits."""
        scale = 1 << bits
        lo = Fraction((self.lower.numerator * scale) // self.lower.denominator, scale)
        hi = Fraction(-((-self.upper.numerator * scale) // self.upper.denominator), scale)
        return EulerProductValue(lo, hi, self.description)

    def format(self, digits: int = 15) -> str:
        if self.lower == self.upper and self.lower.denominator == 1:
            return str(self.lower.numerator)
        return f"[{decimal_floor(self.lower, digits)}, {decimal_ceil(self.upper, digits)}]"

    def __str__(self) -> str:
        return self.format()


def power_enclosure(x: int, num: int, den: int, digits: int = 30) -> EulerProductValue:
    """Enclosure of x^(num/den) for a positive integer x, from integer roots."""
    from .arith import iroot

    if x <= 0:
        raise ValueError("x must be positive")
    scale = 10**digits
    r = iroot(x**num * scale**den, den)
    if r**den == x**num * scale**den:
        return EulerProductValue.exact(Fraction(r, scale))
    return EulerProductValue(Fraction(r, scale), Fraction(r + 1, scale))

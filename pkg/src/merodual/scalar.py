"""Exact scalars: the field Q(i) of complex numbers with rational parts.

Every quantity in the exact layer of this package is a Scalar.  The
representation is a pair of ``fractions.Fraction`` values, so equality,
hashing and arithmetic are all exact and canonical (denominators positive,
fractions reduced).  No floating point enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

RatLike = Union[int, Fraction, str]


def _frac(x: RatLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class Scalar:
    """An element re + im*i of Q(i)."""

    re: Fraction
    im: Fraction

    def __post_init__(self):
        if not isinstance(self.re, Fraction):
            object.__setattr__(self, "re", _frac(self.re))
        if not isinstance(self.im, Fraction):
            object.__setattr__(self, "im", _frac(self.im))

    # -- constructors ---------------------------------------------------

    @staticmethod
    def of(re: RatLike, im: RatLike = 0) -> "Scalar":
        return Scalar(_frac(re), _frac(im))

    @staticmethod
    def zero() -> "Scalar":
        return ZERO

    @staticmethod
    def one() -> "Scalar":
        return ONE

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_one(self) -> bool:
        return self.re == 1 and not self.im

    def is_real(self) -> bool:
        return not self.im

    def is_integer(self) -> bool:
        return not self.im and self.re.denominator == 1

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "Scalar") -> "Scalar":
        a, b, c, d = self.re, self.im, other.re, other.im
        return Scalar(a * c - b * d, a * d + b * c)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im)

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, an exact nonnegative rational."""
        return self.re * self.re + self.im * self.im

    def inv(self) -> "Scalar":
        n = self.abs2()
        if not n:
            raise ZeroDivisionError("inverse of zero Scalar")
        return Scalar(self.re / n, -self.im / n)

    def __truediv__(self, other: "Scalar") -> "Scalar":
        return self * other.inv()

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inv() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, r: RatLike) -> "Scalar":
        f = _frac(r)
        return Scalar(self.re * f, self.im * f)

    # -- formatting -------------------------------------------------------

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        if self.re:
            parts.append(str(self.re))
        if self.im:
            sign = "+" if (self.im > 0 and parts) else ""
            parts.append(f"{sign}{self.im}i")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Scalar({self})"


ZERO = Scalar(Fraction(0), Fraction(0))
ONE = Scalar(Fraction(1), Fraction(0))
IMAG = Scalar(Fraction(0), Fraction(1))


def sc(re: RatLike, im: RatLike = 0) -> Scalar:
    """Shorthand constructor used pervasively in tests and builders."""
    return Scalar.of(re, im)


def scalar_key(s: Scalar):
    """Sort key giving Q(i) the lexicographic (re, im) order.

    Used wherever a deterministic ordering of pole positions or
    eigenvalues is needed.
    """
    return (s.re, s.im)

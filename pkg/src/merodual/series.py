"""Finite exact Laurent series with matrix coefficients.

A MatrixSeries represents sum_{m >= lo} C_m z^m whose coefficients are
known exactly for m <= hi; hi is None when the series is an exact
Laurent polynomial (all higher coefficients are zero).  Arithmetic
tracks the known-through order so truncation errors cannot creep in
silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .matrix import Matrix
from .scalar import Scalar


def _min_order(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class MatrixSeries:
    size: int
    lo: int
    hi: Optional[int]  # known through this exponent; None = exact polynomial
    coeffs: tuple[Matrix, ...]

    def __post_init__(self):
        if self.hi is not None and len(self.coeffs) != self.hi - self.lo + 1:
            raise ValueError("coefficient count does not match [lo, hi]")

    @staticmethod
    def exact(size: int, lo: int, coeffs: list[Matrix]) -> "MatrixSeries":
        while coeffs and coeffs[-1].is_zero():
            coeffs = coeffs[:-1]
        while coeffs and coeffs[0].is_zero():
            coeffs = coeffs[1:]
            lo += 1
        if not coeffs:
            return MatrixSeries(size, 0, None, ())
        return MatrixSeries(size, lo, None, tuple(coeffs))

    @staticmethod
    def zero(size: int) -> "MatrixSeries":
        return MatrixSeries(size, 0, None, ())

    def coefficient(self, m: int) -> Matrix:
        if self.hi is not None and m > self.hi:
            raise ValueError(f"coefficient z^{m} beyond known order {self.hi}")
        if m < self.lo or m - self.lo >= len(self.coeffs):
            return Matrix.zeros(self.size, self.size)
        return self.coeffs[m - self.lo]

    def known_hi(self, default: int) -> int:
        return default if self.hi is None else self.hi

    def truncate(self, hi: int) -> "MatrixSeries":
        if self.hi is not None and self.hi <= hi:
            return self
        if hi < self.lo:
            return MatrixSeries(self.size, hi + 1, hi, ())
        coeffs = tuple(self.coefficient(m) for m in range(self.lo, hi + 1))
        return MatrixSeries(self.size, self.lo, hi, coeffs)

    def __add__(self, other: "MatrixSeries") -> "MatrixSeries":
        if self.size != other.size:
            raise ValueError("size mismatch")
        hi = _min_order(self.hi, other.hi)
        tops = []
        for s in (self, other):
            if s.coeffs:
                tops.append(s.lo + len(s.coeffs) - 1)
        if hi is None:
            if not tops:
                return MatrixSeries(self.size, 0, None, ())
            lo = min(s.lo for s in (self, other) if s.coeffs)
            top = max(tops)
            coeffs = [self.coefficient(m) + other.coefficient(m) for m in range(lo, top + 1)]
            return MatrixSeries.exact(self.size, lo, coeffs)
        los = [s.lo for s in (self, other) if s.coeffs]
        lo = min(los) if los else hi + 1
        if lo > hi:
            return MatrixSeries(self.size, hi + 1, hi, ())
        coeffs = tuple(self.coefficient(m) + other.coefficient(m) for m in range(lo, hi + 1))
        return MatrixSeries(self.size, lo, hi, coeffs)

    def __neg__(self) -> "MatrixSeries":
        return MatrixSeries(self.size, self.lo, self.hi, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "MatrixSeries") -> "MatrixSeries":
        return self + (-other)

    def __mul__(self, other: "MatrixSeries") -> "MatrixSeries":
        if self.size != other.size:
            raise ValueError("size mismatch")
        if not self.coeffs or not other.coeffs:
            hi = _min_order(
                None if self.hi is None else self.hi + (other.lo if other.coeffs else 0),
                None if other.hi is None else other.hi + (self.lo if self.coeffs else 0),
            )
            return MatrixSeries(self.size, 0, hi, ())
        lo = self.lo + other.lo
        hi_a = None if self.hi is None else self.hi + other.lo
        hi_b = None if other.hi is None else other.hi + self.lo
        hi = _min_order(hi_a, hi_b)
        top = (self.lo + len(self.coeffs) - 1) + (other.lo + len(other.coeffs) - 1) if hi is None else hi
        out = []
        for m in range(lo, top + 1):
            acc = Matrix.zeros(self.size, self.size)
            for p in range(self.lo, self.lo + len(self.coeffs)):
                q = m - p
                if other.lo <= q < other.lo + len(other.coeffs):
                    a = self.coeffs[p - self.lo]
                    b = other.coeffs[q - other.lo]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a @ b
            out.append(acc)
        if hi is None:
            return MatrixSeries.exact(self.size, lo, out)
        return MatrixSeries(self.size, lo, hi, tuple(out))

    def scale(self, s: Scalar) -> "MatrixSeries":
        return MatrixSeries(self.size, self.lo, self.hi, tuple(c.scale(s) for c in self.coeffs))

    def derivative(self) -> "MatrixSeries":
        """d/dz; the known-through order drops by one."""
        if not self.coeffs:
            return MatrixSeries(self.size, 0, None if self.hi is None else self.hi - 1, ())
        coeffs = []
        for m in range(self.lo, self.lo + len(self.coeffs)):
            coeffs.append(self.coefficient(m).scale(Scalar.of(Fraction(m))))
        ser = MatrixSeries(
            self.size,
            self.lo - 1,
            None if self.hi is None else self.hi - 1,
            tuple(coeffs),
        )
        return ser

    def inverse(self, hi: int) -> "MatrixSeries":
        """Multiplicative inverse through order hi.

        Requires the lowest coefficient to be invertible; the result has
        lowest exponent -lo.
        """
        from .linalg import inverse as mat_inv

        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero series")
        lead = self.coeffs[0]
        lead_inv = mat_inv(lead)
        if lead_inv is None:
            raise ZeroDivisionError("leading coefficient not invertible")
        # write self = z^lo (lead + higher); invert the unit part by recursion
        unit_len = hi + self.lo + 1  # orders 0 .. hi+lo of the unit part
        if unit_len < 1:
            raise ValueError("requested order below leading term")
        a = [self.coefficient(self.lo + k) for k in range(unit_len)]
        inv = [lead_inv]
        for k in range(1, unit_len):
            acc = Matrix.zeros(self.size, self.size)
            for j in range(1, k + 1):
                if j < len(a):
                    acc = acc + a[j] @ inv[k - j]
            inv.append((-lead_inv) @ acc)
        return MatrixSeries(self.size, -self.lo, hi, tuple(inv))

    def principal_part(self) -> list[Matrix]:
        """Coefficients of z^-1, z^-2, ... as a stack [C_-1, C_-2, ...]."""
        out = []
        j = 1
        while -j >= self.lo:
            out.append(self.coefficient(-j))
            j += 1
        while out and out[-1].is_zero():
            out.pop()
        return out

    def is_zero_through(self, hi: int) -> bool:
        if self.hi is not None and self.hi < hi:
            raise ValueError("series not known through requested order")
        return all(self.coefficient(m).is_zero() for m in range(self.lo, hi + 1))

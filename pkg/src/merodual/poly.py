"""Univariate polynomials over Q(i) and exact integer-root enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .errors import ZeroPolynomialError
from .matrix import Matrix
from .scalar import ONE, ZERO, Scalar


def _trim(coeffs: tuple[Scalar, ...]) -> tuple[Scalar, ...]:
    n = len(coeffs)
    while n > 0 and coeffs[n - 1].is_zero():
        n -= 1
    return coeffs[:n]


@dataclass(frozen=True)
class Polynomial:
    """Coefficients in ascending order; the zero polynomial has none."""

    coeffs: tuple[Scalar, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(tuple(self.coeffs)))

    @staticmethod
    def of(coeffs: Sequence[Scalar]) -> "Polynomial":
        return Polynomial(tuple(coeffs))

    @staticmethod
    def constant(s: Scalar) -> "Polynomial":
        return Polynomial((s,))

    @staticmethod
    def variable() -> "Polynomial":
        return Polynomial((ZERO, ONE))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial assigned -1."""
        return len(self.coeffs) - 1

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [ZERO] * (n - len(self.coeffs))
        b = list(other.coeffs) + [ZERO] * (n - len(other.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-x for x in self.coeffs))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero() or other.is_zero():
            return Polynomial(())
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return Polynomial(tuple(out))

    def scale(self, s: Scalar) -> "Polynomial":
        return Polynomial(tuple(x * s for x in self.coeffs))

    def eval(self, x: Scalar) -> Scalar:
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_int(self, k: int) -> Scalar:
        return self.eval(Scalar.of(k))

    def compose_linear(self, a: Scalar, b: Scalar) -> "Polynomial":
        """Return p(a*x + b)."""
        lin = Polynomial((b, a))
        acc = Polynomial(())
        for c in reversed(self.coeffs):
            acc = acc * lin + Polynomial.constant(c)
        return acc

    def divide_linear(self, root: Scalar) -> "Polynomial":
        """Exact synthetic division by (x - root); requires p(root) = 0."""
        if not self.eval(root).is_zero():
            raise ValueError("not a root; synthetic division would leave remainder")
        n = self.degree
        q = [ZERO] * n
        acc = self.coeffs[n]
        q[n - 1] = acc
        for i in range(n - 1, 0, -1):
            acc = self.coeffs[i] + root * acc
            q[i - 1] = acc
        return Polynomial(tuple(q))

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if i == 0:
                terms.append(str(c))
            else:
                var = "k" if i == 1 else f"k^{i}"
                terms.append(f"({c})*{var}")
        return " + ".join(terms)


def _ceil_sqrt_fraction(f: Fraction) -> int:
    """Smallest integer b >= 0 with b*b >= f."""
    if f <= 0:
        return 0
    num = -(-f.numerator // f.denominator)  # ceil(f)
    b = isqrt(num)
    if b * b < num:
        b += 1
    return b


def integer_roots(p: Polynomial) -> list[int]:
    """All integer roots of p, sorted ascending.

    Candidates are bounded by the Cauchy bound 1 + max |c_j / c_deg| and
    every candidate is confirmed by exact evaluation, so the result is
    exact.  Raises ZeroPolynomialError on the zero polynomial, which has
    every integer as a root.
    """
    if p.is_zero():
        raise ZeroPolynomialError("every integer is a root of the zero polynomial")
    if p.degree == 0:
        return []
    lead = p.coeffs[-1]
    lead_inv_abs2 = lead.abs2()
    bound = 1
    for c in p.coeffs[:-1]:
        # |c / lead| <= ceil_sqrt(|c|^2 / |lead|^2)
        b = _ceil_sqrt_fraction(c.abs2() / lead_inv_abs2)
        if 1 + b > bound:
            bound = 1 + b
    roots = [k for k in range(-bound, bound + 1) if p.eval_int(k).is_zero()]
    return roots


def charpoly(m: Matrix) -> Polynomial:
    """Characteristic polynomial det(x*I - m) via Faddeev-LeVerrier.

    Exact over Q(i); O(n^4) scalar operations, fine at the sizes this
    package works with.
    """
    if not m.is_square():
        raise ValueError("characteristic polynomial of non-square matrix")
    n = m.rows
    if n == 0:
        return Polynomial((ONE,))
    coeffs = [ONE]  # leading coefficient of x^n
    mk = Matrix.identity(n)
    for k in range(1, n + 1):
        am = m @ mk
        c = am.trace().scale(Fraction(-1, k))
        coeffs.append(c)
        mk = am + Matrix.scalar(n, c)
    coeffs.reverse()
    return Polynomial(tuple(coeffs))


def poly_matrix_det(grid: list[list[Polynomial]]) -> Polynomial:
    """Determinant of a small matrix of polynomials by Laplace expansion."""
    n = len(grid)
    if n == 0:
        return Polynomial((ONE,))
    if n == 1:
        return grid[0][0]
    acc = Polynomial(())
    for j in range(n):
        entry = grid[0][j]
        if entry.is_zero():
            continue
        minor = [[grid[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
        term = entry * poly_matrix_det(minor)
        if j % 2:
            term = -term
        acc = acc + term
    return acc

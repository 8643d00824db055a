"""Exact dense matrices over Q(i).

Matrices are immutable; entries are stored row-major as a flat tuple of
Scalar.  Shapes with zero rows or columns are legal, which keeps the
category-level operations (direct sums, duals of empty data) total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .scalar import ONE, ZERO, Scalar

Vector = tuple[Scalar, ...]


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    data: tuple[Scalar, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix dimensions")
        if len(self.data) != self.rows * self.cols:
            raise ValueError("data length does not match shape")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Scalar]]) -> "Matrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
        return Matrix(r, c, tuple(x for row in rows for x in row))

    @staticmethod
    def zeros(r: int, c: int) -> "Matrix":
        return Matrix(r, c, (ZERO,) * (r * c))

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(n, n, tuple(ONE if i == j else ZERO for i in range(n) for j in range(n)))

    @staticmethod
    def diag(entries: Sequence[Scalar]) -> "Matrix":
        n = len(entries)
        return Matrix(n, n, tuple(entries[i] if i == j else ZERO for i in range(n) for j in range(n)))

    @staticmethod
    def scalar(n: int, s: Scalar) -> "Matrix":
        return Matrix.diag([s] * n)

    @staticmethod
    def build(r: int, c: int, f: Callable[[int, int], Scalar]) -> "Matrix":
        return Matrix(r, c, tuple(f(i, j) for i in range(r) for j in range(c)))

    @staticmethod
    def from_column(v: Sequence[Scalar]) -> "Matrix":
        return Matrix(len(v), 1, tuple(v))

    # -- access -----------------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        return self.data[i * self.cols + j]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> Vector:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int) -> Vector:
        return tuple(self.data[i * self.cols + j] for i in range(self.rows))

    def row_list(self) -> list[list[Scalar]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.data)

    def is_square(self) -> bool:
        return self.rows == self.cols

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.data, other.data)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.data, other.data)))

    def __neg__(self) -> "Matrix":
        return Matrix(self.rows, self.cols, tuple(-a for a in self.data))

    def scale(self, s: Scalar) -> "Matrix":
        return Matrix(self.rows, self.cols, tuple(a * s for a in self.data))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        r, k, c = self.rows, self.cols, other.cols
        a, b = self.data, other.data
        out = []
        for i in range(r):
            arow = a[i * k : (i + 1) * k]
            for j in range(c):
                acc = ZERO
                for p in range(k):
                    x = arow[p]
                    if x.re or x.im:
                        y = b[p * c + j]
                        if y.re or y.im:
                            acc = acc + x * y
                out.append(acc)
        return Matrix(r, c, tuple(out))

    def apply(self, v: Sequence[Scalar]) -> Vector:
        """Matrix-vector product."""
        if self.cols != len(v):
            raise ValueError("shape mismatch in apply")
        out = []
        for i in range(self.rows):
            acc = ZERO
            base = i * self.cols
            for p, x in enumerate(v):
                if x.re or x.im:
                    m = self.data[base + p]
                    if m.re or m.im:
                        acc = acc + m * x
            out.append(acc)
        return tuple(out)

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows, tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def conj_transpose(self) -> "Matrix":
        return Matrix(
            self.cols, self.rows, tuple(self[i, j].conj() for j in range(self.cols) for i in range(self.rows))
        )

    def trace(self) -> Scalar:
        if not self.is_square():
            raise ValueError("trace of non-square matrix")
        acc = ZERO
        for i in range(self.rows):
            acc = acc + self[i, i]
        return acc

    def power(self, n: int) -> "Matrix":
        if not self.is_square():
            raise ValueError("power of non-square matrix")
        out = Matrix.identity(self.rows)
        for _ in range(n):
            out = out @ self
        return out

    def commutator(self, other: "Matrix") -> "Matrix":
        return self @ other - other @ self

    # -- slicing and assembly ------------------------------------------------

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Matrix":
        return Matrix(
            len(row_idx),
            len(col_idx),
            tuple(self[i, j] for i in row_idx for j in col_idx),
        )

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        return self.submatrix(range(r0, r1), range(c0, c1))

    @staticmethod
    def hstack(mats: Sequence["Matrix"]) -> "Matrix":
        mats = [m for m in mats]
        if not mats:
            return Matrix.zeros(0, 0)
        r = mats[0].rows
        if any(m.rows != r for m in mats):
            raise ValueError("hstack row mismatch")
        rows = [[x for m in mats for x in m.row(i)] for i in range(r)]
        return Matrix.from_rows(rows) if r else Matrix.zeros(0, sum(m.cols for m in mats))

    @staticmethod
    def vstack(mats: Sequence["Matrix"]) -> "Matrix":
        mats = [m for m in mats]
        if not mats:
            return Matrix.zeros(0, 0)
        c = mats[0].cols
        if any(m.cols != c for m in mats):
            raise ValueError("vstack column mismatch")
        data = tuple(x for m in mats for x in m.data)
        return Matrix(sum(m.rows for m in mats), c, data)

    @staticmethod
    def block_diag(mats: Sequence["Matrix"]) -> "Matrix":
        r = sum(m.rows for m in mats)
        c = sum(m.cols for m in mats)
        out = [[ZERO] * c for _ in range(r)]
        i0 = j0 = 0
        for m in mats:
            for i in range(m.rows):
                for j in range(m.cols):
                    out[i0 + i][j0 + j] = m[i, j]
            i0 += m.rows
            j0 += m.cols
        return Matrix(r, c, tuple(x for row in out for x in row))

    @staticmethod
    def assemble(grid: Sequence[Sequence["Matrix"]]) -> "Matrix":
        """Glue a 2D grid of conforming blocks."""
        return Matrix.vstack([Matrix.hstack(row) for row in grid])

    def embed(self, total_rows: int, total_cols: int, r0: int, c0: int) -> "Matrix":
        """Place this block at offset (r0, c0) in a zero matrix."""
        out = [[ZERO] * total_cols for _ in range(total_rows)]
        for i in range(self.rows):
            for j in range(self.cols):
                out[r0 + i][c0 + j] = self[i, j]
        return Matrix(total_rows, total_cols, tuple(x for row in out for x in row))

    # -- norms (exact surrogate) ----------------------------------------------

    def max_abs2(self):
        """Largest squared modulus among entries, as a Fraction."""
        best = ZERO.abs2()
        for x in self.data:
            a = x.abs2()
            if a > best:
                best = a
        return best

    def __str__(self) -> str:
        rows = ["[" + ", ".join(str(x) for x in self.row(i)) + "]" for i in range(self.rows)]
        return "[" + "; ".join(rows) + "]"

    def _same_shape(self, other: "Matrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


def mat(rows: Iterable[Iterable]) -> Matrix:
    """Build a Matrix from nested ints/Fractions/Scalars (test shorthand)."""
    conv = []
    for row in rows:
        conv.append([x if isinstance(x, Scalar) else Scalar.of(x) for x in row])
    return Matrix.from_rows(conv)

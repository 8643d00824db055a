"""Exact linear algebra over Q(i).

Everything here is deterministic: Gaussian elimination always takes the
first nonzero entry in row order as pivot, underdetermined solves zero
the free coordinates, and quotient spaces are realized on the non-pivot
coordinates of a row-reduced kernel basis.  Determinism is what makes
the canonical constructions downstream reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .matrix import Matrix, Vector
from .scalar import ONE, ZERO, Scalar


def _rref_inplace(rows: list[list[Scalar]], ncols: int) -> list[int]:
    """Reduce rows in place to reduced row echelon form; return pivot columns."""
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if not rows[i][c].is_zero():
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c].inv()
        rows[r] = [x * inv for x in rows[r]]
        prow = rows[r]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if not f.is_zero():
                    rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    rows = m.row_list()
    pivots = _rref_inplace(rows, m.cols)
    return Matrix.from_rows(rows) if m.rows else m, pivots


def rank(m: Matrix) -> int:
    rows = m.row_list()
    return len(_rref_inplace(rows, m.cols))


def kernel(m: Matrix) -> list[Vector]:
    """Basis of the right null space, in non-pivot column order."""
    rows = m.row_list()
    pivots = _rref_inplace(rows, m.cols)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = [ZERO] * m.cols
        v[f] = ONE
        for r, p in enumerate(pivots):
            v[p] = -rows[r][f]
        basis.append(tuple(v))
    return basis


def solve(a: Matrix, b: Matrix) -> Optional[Matrix]:
    """Solve a @ x = b column by column.

    Free variables are set to zero, so the solution is deterministic.
    Returns None when the system is inconsistent.
    """
    if a.rows != b.rows:
        raise ValueError("solve: row mismatch")
    aug = [list(a.row(i)) + list(b.row(i)) for i in range(a.rows)]
    pivots = _rref_inplace(aug, a.cols + b.cols)
    for p in pivots:
        if p >= a.cols:
            return None
    x = [[ZERO] * b.cols for _ in range(a.cols)]
    for r, p in enumerate(pivots):
        for j in range(b.cols):
            x[p][j] = aug[r][a.cols + j]
    return Matrix.from_rows(x) if a.cols else Matrix.zeros(0, b.cols)


def inverse(m: Matrix) -> Optional[Matrix]:
    if not m.is_square():
        raise ValueError("inverse of non-square matrix")
    sol = solve(m, Matrix.identity(m.rows))
    if sol is None:
        return None
    # solve() finds some preimage; for square m it exists iff m is invertible
    if rank(m) != m.rows:
        return None
    return sol


def det(m: Matrix) -> Scalar:
    """Determinant by fraction elimination with row-order pivoting."""
    if not m.is_square():
        raise ValueError("determinant of non-square matrix")
    n = m.rows
    rows = m.row_list()
    sign = 1
    acc = ONE
    for c in range(n):
        pr = None
        for i in range(c, n):
            if not rows[i][c].is_zero():
                pr = i
                break
        if pr is None:
            return ZERO
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            sign = -sign
        piv = rows[c][c]
        acc = acc * piv
        inv = piv.inv()
        for i in range(c + 1, n):
            f = rows[i][c]
            if not f.is_zero():
                f = f * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return acc if sign > 0 else -acc


class SpanBasis:
    """Incrementally maintained reduced row basis of a subspace of Q(i)^n."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[Scalar]] = []
        self.pivots: list[int] = []

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence[Scalar]) -> list[Scalar]:
        w = list(v)
        for row, p in zip(self.rows, self.pivots):
            f = w[p]
            if not f.is_zero():
                w = [a - f * b for a, b in zip(w, row)]
        return w

    def insert(self, v: Sequence[Scalar]) -> bool:
        """Add v to the span; True if it enlarged the subspace."""
        w = self.reduce(v)
        p = next((i for i, x in enumerate(w) if not x.is_zero()), None)
        if p is None:
            return False
        inv = w[p].inv()
        w = [x * inv for x in w]
        for i, row in enumerate(self.rows):
            f = row[p]
            if not f.is_zero():
                self.rows[i] = [a - f * b for a, b in zip(row, w)]
        pos = next((i for i, q in enumerate(self.pivots) if q > p), len(self.pivots))
        self.rows.insert(pos, w)
        self.pivots.insert(pos, p)
        return True

    def contains(self, v: Sequence[Scalar]) -> bool:
        return all(x.is_zero() for x in self.reduce(v))

    def vectors(self) -> list[Vector]:
        return [tuple(r) for r in self.rows]


def invariant_closure(t: Matrix, seeds: Sequence[Vector]) -> list[Vector]:
    """Basis of the smallest t-invariant subspace containing span(seeds)."""
    if not t.is_square():
        raise ValueError("invariant_closure requires a square matrix")
    basis = SpanBasis(t.rows)
    queue: list[Vector] = []
    for s in seeds:
        if len(s) != t.rows:
            raise ValueError("seed length mismatch")
        if basis.insert(s):
            queue.append(tuple(s))
    while queue:
        v = queue.pop()
        tv = t.apply(v)
        if basis.insert(tv):
            queue.append(tv)
        if len(basis) == t.rows:
            break
    return basis.vectors()


def algebra_closure_dim(gens: Sequence[Matrix], include_identity: bool = True) -> int:
    """Dimension of the unital matrix algebra generated by gens.

    Breadth-first span closure under left and right multiplication by the
    generators, with early exit at the full dimension n^2.
    """
    if not gens:
        raise ValueError("algebra_closure_dim needs at least one generator")
    n = gens[0].rows
    for g in gens:
        if g.shape != (n, n):
            raise ValueError("generators must be square of equal size")
    full = n * n
    basis = SpanBasis(full)
    queue: list[Matrix] = []

    def push(m: Matrix):
        if basis.insert(m.data):
            queue.append(m)

    if include_identity:
        push(Matrix.identity(n))
    for g in gens:
        push(g)
    while queue and len(basis) < full:
        m = queue.pop()
        for g in gens:
            push(m @ g)
            if len(basis) == full:
                break
            push(g @ m)
            if len(basis) == full:
                break
    return len(basis)


class Quotient:
    """Coordinate model of ambient/span(subspace).

    The subspace basis is row reduced; the quotient is realized on the
    non-pivot coordinates, with project/embed matrices fixed by that
    choice.  project @ embed = identity on the quotient.
    """

    def __init__(self, ambient_dim: int, subspace: Sequence[Vector]):
        rows = [list(v) for v in subspace]
        pivots = _rref_inplace(rows, ambient_dim)
        rows = rows[: len(pivots)]
        self.ambient_dim = ambient_dim
        self._rows = rows
        self._pivots = pivots
        pivot_set = set(pivots)
        self.coords = [c for c in range(ambient_dim) if c not in pivot_set]
        self.dim = len(self.coords)

    def project_vec(self, v: Sequence[Scalar]) -> Vector:
        w = list(v)
        for row, p in zip(self._rows, self._pivots):
            f = w[p]
            if not f.is_zero():
                w = [a - f * b for a, b in zip(w, row)]
        return tuple(w[c] for c in self.coords)

    def embed_vec(self, w: Sequence[Scalar]) -> Vector:
        v = [ZERO] * self.ambient_dim
        for c, x in zip(self.coords, w):
            v[c] = x
        return tuple(v)

    @property
    def project_matrix(self) -> Matrix:
        cols = []
        for i in range(self.ambient_dim):
            e = [ZERO] * self.ambient_dim
            e[i] = ONE
            cols.append(self.project_vec(e))
        return Matrix.build(self.dim, self.ambient_dim, lambda i, j: cols[j][i])

    @property
    def embed_matrix(self) -> Matrix:
        return Matrix.build(
            self.ambient_dim,
            self.dim,
            lambda i, j: ONE if i == self.coords[j] else ZERO,
        )


# -- matrix-unknown linear systems ----------------------------------------


@dataclass(frozen=True)
class MatEquation:
    """Sum_k L_k @ X @ R_k = rhs, one linear condition on the unknown X."""

    terms: tuple[tuple[Matrix, Matrix], ...]
    rhs: Matrix


def _mat_system(shape: tuple[int, int], eqs: Sequence[MatEquation]) -> tuple[Matrix, Matrix]:
    r, c = shape
    nunk = r * c
    rows: list[list[Scalar]] = []
    rhs_rows: list[list[Scalar]] = []
    for eq in eqs:
        er, ec = eq.rhs.shape
        for lhs, rhs_m in eq.terms:
            if lhs.cols != r or rhs_m.rows != c or lhs.rows != er or rhs_m.cols != ec:
                raise ValueError("equation term shapes do not conform")
        for i in range(er):
            for j in range(ec):
                row = [ZERO] * nunk
                for lhs, rhs_m in eq.terms:
                    for p in range(r):
                        lip = lhs[i, p]
                        if lip.is_zero():
                            continue
                        for q in range(c):
                            rqj = rhs_m[q, j]
                            if not rqj.is_zero():
                                row[p * c + q] = row[p * c + q] + lip * rqj
                rows.append(row)
                rhs_rows.append([eq.rhs[i, j]])
    a = Matrix.from_rows(rows) if rows else Matrix.zeros(0, nunk)
    b = Matrix.from_rows(rhs_rows) if rhs_rows else Matrix.zeros(0, 1)
    return a, b


def solve_matrix_equations(shape: tuple[int, int], eqs: Sequence[MatEquation]) -> Optional[Matrix]:
    """Deterministic solve for the matrix unknown; None if inconsistent."""
    a, b = _mat_system(shape, eqs)
    x = solve(a, b)
    if x is None:
        return None
    r, c = shape
    return Matrix(r, c, tuple(x[i * c + j, 0] for i in range(r) for j in range(c)))


def kernel_matrix_equations(shape: tuple[int, int], eqs: Sequence[MatEquation]) -> list[Matrix]:
    """Basis of homogeneous solutions of the given matrix equations."""
    a, _ = _mat_system(shape, eqs)
    r, c = shape
    return [Matrix(r, c, v) for v in kernel(a)]


# -- hermitian projections -------------------------------------------------


def _herm_inner(x: Matrix, y: Matrix) -> Scalar:
    """tr(x y*) as a Scalar; positive definite on matrices over Q(i)."""
    acc = ZERO
    for a, b in zip(x.data, y.data):
        acc = acc + a * b.conj()
    return acc


def remove_component(x: Matrix, basis: Sequence[Matrix]) -> Matrix:
    """Subtract the orthogonal projection of x onto span(basis).

    Orthogonality is with respect to the positive-definite pairing
    tr(X Y*), which stays inside Q(i), so the projection is exact.
    """
    if not basis:
        return x
    m = len(basis)
    gram = Matrix.build(m, m, lambda i, j: _herm_inner(basis[j], basis[i]))
    rhs = Matrix.from_rows([[_herm_inner(x, b)] for b in basis])
    coef = solve(gram, rhs)
    if coef is None:
        raise RuntimeError("Gram system unsolvable; basis not independent")
    out = x
    for i, b in enumerate(basis):
        out = out - b.scale(coef[i, 0])
    return out


# -- blocked Sylvester solve -------------------------------------------------


def _ad_operator_matrix(n_mat: Matrix) -> Matrix:
    """Matrix of X -> X@N - N@X on End(W) in the standard (row-major) basis."""
    d = n_mat.rows
    cols = []
    for p in range(d):
        for q in range(d):
            e = Matrix.build(d, d, lambda i, j, p=p, q=q: ONE if (i, j) == (p, q) else ZERO)
            cols.append((e @ n_mat - n_mat @ e).data)
    return Matrix.build(d * d, d * d, lambda i, j: cols[j][i])


def sylvester_block_solve(
    blocks: Sequence[tuple[Scalar, Matrix]], rhs: Matrix
) -> tuple[Matrix, Matrix]:
    """Solve [xi, T] = rhs - residual for block-diagonal T = diag(t_i + N_i).

    Off-diagonal blocks of xi are uniquely determined because the
    eigenvalue offsets t_j - t_i are nonzero.  On diagonal blocks the
    right-hand side is split as (component in range ad_N) + residual,
    where the residual lives in the orthogonal complement of the range
    under the trace pairing tr(X Y*); xi's diagonal blocks then have
    their Ker(ad_N) component removed under the same pairing.  With
    these choices (xi, residual) is unique and residual == 0 exactly
    when rhs is in range(ad_T).
    """
    sizes = [n.rows for _, n in blocks]
    total = sum(sizes)
    if rhs.shape != (total, total):
        raise ValueError("rhs shape does not match total block size")
    offs = []
    o = 0
    for s in sizes:
        offs.append(o)
        o += s
    seen = set()
    for t, _ in blocks:
        if (t.re, t.im) in seen:
            raise ValueError("block eigenvalues must be distinct")
        seen.add((t.re, t.im))

    xi_grid = [[None] * len(blocks) for _ in blocks]
    res_blocks: list[Matrix] = []
    for i, (ti, ni) in enumerate(blocks):
        for j, (tj, nj) in enumerate(blocks):
            rblock = rhs.block(offs[i], offs[i] + sizes[i], offs[j], offs[j] + sizes[j])
            if i != j:
                # ((tj - ti) X + X Nj - Ni X) = rhs_ij, invertible operator
                di, dj = sizes[i], sizes[j]
                eq = MatEquation(
                    terms=(
                        (Matrix.scalar(di, tj - ti), Matrix.identity(dj)),
                        (Matrix.identity(di), nj),
                        (-ni, Matrix.identity(dj)),
                    ),
                    rhs=rblock,
                )
                x = solve_matrix_equations((di, dj), [eq])
                if x is None:
                    raise RuntimeError("off-diagonal Sylvester block unexpectedly singular")
                xi_grid[i][j] = x
            else:
                d = sizes[i]
                if d == 0:
                    xi_grid[i][j] = Matrix.zeros(0, 0)
                    res_blocks.append(Matrix.zeros(0, 0))
                    continue
                ad = _ad_operator_matrix(ni)
                comp = [Matrix(d, d, v) for v in kernel(ad.conj_transpose())]
                ker = [Matrix(d, d, v) for v in kernel(ad)]
                cols = [ad]
                for cmat in comp:
                    cols.append(Matrix.from_column(cmat.data))
                aug = Matrix.hstack(cols)
                sol = solve(aug, Matrix.from_column(rblock.data))
                if sol is None:
                    raise RuntimeError("range/complement decomposition failed")
                x = Matrix(d, d, tuple(sol[k, 0] for k in range(d * d)))
                x = remove_component(x, ker)
                resid = Matrix.zeros(d, d)
                for idx, cmat in enumerate(comp):
                    resid = resid + cmat.scale(sol[d * d + idx, 0])
                xi_grid[i][j] = x
                res_blocks.append(resid)
    xi = Matrix.assemble(xi_grid)
    residual = Matrix.block_diag(res_blocks)
    return xi, residual


def shift_block(dim_v: int, length: int) -> Matrix:
    """Multiplication by z on V (x) C[z]/(z^length), basis z^{l-1},...,z,1.

    Block superdiagonal of identity blocks; nilpotent of index `length`.
    """
    total = dim_v * length
    return Matrix.build(
        total,
        total,
        lambda i, j: ONE if (j - i == dim_v and i // dim_v + 1 == j // dim_v and i % dim_v == j % dim_v) else ZERO,
    )


def in_shift_ad_range(x: Matrix, dim_v: int, length: int) -> bool:
    """Membership of x in range(ad_N) for the block shift N.

    Exact criterion: sum_{j=1..l} N^{l-j} x N^{j-1} = 0.
    """
    if x.shape != (dim_v * length, dim_v * length):
        raise ValueError("shape does not match dim_v * length")
    n = shift_block(dim_v, length)
    powers = [Matrix.identity(dim_v * length)]
    for _ in range(length - 1):
        powers.append(powers[-1] @ n)
    acc = Matrix.zeros(dim_v * length, dim_v * length)
    for j in range(1, length + 1):
        acc = acc + powers[length - j] @ x @ powers[j - 1]
    return acc.is_zero()

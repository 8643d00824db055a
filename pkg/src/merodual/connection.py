"""Meromorphic connections on the trivial bundle over the Riemann sphere.

A Connection stores d - A dx with A = A0 + sum_i sum_j A^i_j (x-t_i)^-j,
i.e. a constant term (the pole at infinity has order at most two) plus
principal parts at finitely many finite points.  Local normal forms,
exact Laurent expansion, polynomial gauge action, isomorphism search and
truncated formal matching against a non-resonant normal form live here.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import NonResonantRequiredError
from .linalg import MatEquation, inverse, kernel, kernel_matrix_equations, solve
from .matrix import Matrix
from .poly import charpoly, integer_roots
from .scalar import ONE, ZERO, Scalar, scalar_key
from .series import MatrixSeries


@dataclass(frozen=True)
class PolePart:
    """Principal part at a finite point: coeffs[j-1] multiplies (x-t)^-j."""

    position: Scalar
    coeffs: tuple[Matrix, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class Connection:
    dim: int
    constant_term: Matrix
    poles: tuple[PolePart, ...]

    def __post_init__(self):
        if self.constant_term.shape != (self.dim, self.dim):
            raise ValueError("constant term shape mismatch")
        seen = set()
        for p in self.poles:
            if not p.coeffs or p.coeffs[-1].is_zero():
                raise ValueError("pole stacks must be trimmed and nonempty")
            for c in p.coeffs:
                if c.shape != (self.dim, self.dim):
                    raise ValueError("pole coefficient shape mismatch")
            k = scalar_key(p.position)
            if k in seen:
                raise ValueError("duplicate pole positions")
            seen.add(k)
        keys = [scalar_key(p.position) for p in self.poles]
        if keys != sorted(keys):
            raise ValueError("poles must be sorted by position; use Connection.make")

    @staticmethod
    def make(
        dim: int,
        constant_term: Matrix,
        poles: Sequence[tuple[Scalar, Sequence[Matrix]]],
    ) -> "Connection":
        """Canonical constructor: trims, drops empty stacks, sorts poles."""
        cleaned = []
        for pos, coeffs in poles:
            cs = list(coeffs)
            while cs and cs[-1].is_zero():
                cs.pop()
            if cs:
                cleaned.append(PolePart(pos, tuple(cs)))
        cleaned.sort(key=lambda p: scalar_key(p.position))
        return Connection(dim, constant_term, tuple(cleaned))

    def pole_at(self, pos: Scalar) -> Optional[PolePart]:
        for p in self.poles:
            if p.position == pos:
                return p
        return None

    def pole_positions(self) -> list[Scalar]:
        return [p.position for p in self.poles]

    def coefficient(self, pos: Scalar, j: int) -> Matrix:
        """A^(pos)_j, zero when absent."""
        p = self.pole_at(pos)
        if p is None or j > len(p.coeffs):
            return Matrix.zeros(self.dim, self.dim)
        return p.coeffs[j - 1]

    def is_scalar_constant(self) -> bool:
        """True for the rank-one objects (C, c dx): dim 1 and no poles."""
        return self.dim == 1 and not self.poles


def laurent_principal(a: Connection, where: Union[int, str]) -> list[Matrix]:
    """Principal part stack at pole index `where`, or [A0] for 'inf'."""
    if isinstance(where, str):
        if where != "inf":
            raise ValueError("pole selector must be an index or 'inf'")
        return [a.constant_term]
    return list(a.poles[where].coeffs)


def laurent_series(a: Connection, center: Scalar, hi: int) -> MatrixSeries:
    """Exact Laurent expansion of A in z = x - center through order hi."""
    n = a.dim
    own = a.pole_at(center)
    lo = -(own.order if own else 0)
    coeffs = {m: Matrix.zeros(n, n) for m in range(lo, hi + 1)}
    if 0 in coeffs:
        coeffs[0] = coeffs[0] + a.constant_term
    for p in a.poles:
        if p.position == center:
            for j, c in enumerate(p.coeffs, start=1):
                coeffs[-j] = coeffs[-j] + c
            continue
        d = p.position - center  # pole at z = d != 0
        dinv = d.inv()
        for j, c in enumerate(p.coeffs, start=1):
            # (z - d)^-j = (-1)^j d^-j sum_m C(j-1+m, m) (z/d)^m
            sign = ONE if j % 2 == 0 else -ONE
            base = sign * dinv**j
            binom = Fraction(1)
            for m in range(0, hi + 1):
                if m > 0:
                    binom = binom * Fraction(j - 1 + m, m)
                coeffs[m] = coeffs[m] + c.scale(base.scale(binom) * dinv**m)
    return MatrixSeries(n, lo, hi, tuple(coeffs[m] for m in range(lo, hi + 1)))


def direct_sum(a: Connection, b: Connection) -> Connection:
    """Block-diagonal sum; pole stacks merge at shared positions."""
    n = a.dim + b.dim
    const = Matrix.block_diag([a.constant_term, b.constant_term])
    positions = {scalar_key(p.position): p.position for p in a.poles}
    for p in b.poles:
        positions.setdefault(scalar_key(p.position), p.position)
    poles = []
    for key in positions:
        pos = positions[key]
        pa = a.pole_at(pos)
        pb = b.pole_at(pos)
        ka = pa.order if pa else 0
        kb = pb.order if pb else 0
        stack = []
        for j in range(1, max(ka, kb) + 1):
            ca = pa.coeffs[j - 1] if pa and j <= ka else Matrix.zeros(a.dim, a.dim)
            cb = pb.coeffs[j - 1] if pb and j <= kb else Matrix.zeros(b.dim, b.dim)
            stack.append(Matrix.block_diag([ca, cb]))
        poles.append((pos, stack))
    return Connection.make(n, const, poles)


def intertwiner_space(a: Connection, b: Connection) -> list[Matrix]:
    """Basis of {phi : phi A = B phi coefficientwise}."""
    eqs = []
    positions = {scalar_key(p.position): p.position for p in list(a.poles) + list(b.poles)}
    pairs = [(a.constant_term, b.constant_term)]
    for key in positions:
        pos = positions[key]
        ka = a.pole_at(pos).order if a.pole_at(pos) else 0
        kb = b.pole_at(pos).order if b.pole_at(pos) else 0
        for j in range(1, max(ka, kb) + 1):
            pairs.append((a.coefficient(pos, j), b.coefficient(pos, j)))
    for ca, cb in pairs:
        eqs.append(
            MatEquation(
                terms=((Matrix.identity(b.dim), ca), (-cb, Matrix.identity(a.dim))),
                rhs=Matrix.zeros(b.dim, a.dim),
            )
        )
    return kernel_matrix_equations((b.dim, a.dim), eqs)


def iso_search(a: Connection, b: Connection, attempts: int = 64, seed: int = 0) -> Optional[Matrix]:
    """Exact invertible intertwiner phi with phi A = B phi, or None.

    Scans the intertwiner space: each basis element first, then seeded
    random small-integer combinations, at most `attempts` of them.  A
    returned witness is verified invertible, so false positives cannot
    occur; a None can in principle miss (the invertible locus may avoid
    the scanned points), which callers treat as search failure.
    """
    if a.dim != b.dim:
        return None
    basis = intertwiner_space(a, b)
    if not basis:
        return None
    for cand in basis:
        if inverse(cand) is not None:
            return cand
    rng = random.Random(seed)
    for _ in range(attempts):
        cand = Matrix.zeros(b.dim, a.dim)
        for m in basis:
            cand = cand + m.scale(Scalar.of(rng.randint(-3, 3)))
        if inverse(cand) is not None:
            return cand
    return None


# -- normal forms ------------------------------------------------------------


@dataclass(frozen=True)
class Group:
    """One exponential group of a local normal form.

    lambda_coeffs lists the coefficients (lambda_{a,j})_{j=2..k} of
    dz-derivative of the irregular part, ascending in j; the empty tuple
    marks the group with no irregular part.  L is that group's exponent
    block, of size mult.
    """

    mult: int
    lambda_coeffs: tuple[Scalar, ...]
    L: Matrix

    def __post_init__(self):
        if self.mult < 1:
            raise ValueError("group multiplicity must be positive")
        if self.L.shape != (self.mult, self.mult):
            raise ValueError("exponent block shape mismatch")
        if self.lambda_coeffs and self.lambda_coeffs[-1].is_zero():
            raise ValueError("leading irregular coefficient must be nonzero")

    @property
    def pole_order(self) -> int:
        """Order of d(Lambda) + L dz/z at the center for this group."""
        return len(self.lambda_coeffs) + 1


@dataclass(frozen=True)
class NormalForm:
    """Unramified local normal form d - (dLambda + L dz/z).

    position None means the form sits at infinity (only the logarithmic
    case is used there).
    """

    position: Optional[Scalar]
    groups: tuple[Group, ...]

    def __post_init__(self):
        if not self.groups:
            raise ValueError("normal form needs at least one group")
        seen = set()
        for g in self.groups:
            if g.lambda_coeffs in seen:
                raise ValueError("groups must have pairwise distinct irregular parts")
            seen.add(g.lambda_coeffs)

    @property
    def dim(self) -> int:
        return sum(g.mult for g in self.groups)

    @property
    def pole_order(self) -> int:
        return max(g.pole_order for g in self.groups)

    def lambda_coefficient(self, j: int) -> Matrix:
        """Coefficient of z^-j in dLambda/dz, block diagonal over groups."""
        blocks = []
        for g in self.groups:
            val = ZERO
            if 2 <= j <= g.pole_order:
                val = g.lambda_coeffs[j - 2]
            blocks.append(Matrix.scalar(g.mult, val))
        return Matrix.block_diag(blocks)

    @property
    def exponent(self) -> Matrix:
        return Matrix.block_diag([g.L for g in self.groups])

    def series(self, hi: int) -> MatrixSeries:
        """The one-form coefficient dLambda/dz + L/z as an exact series."""
        n = self.dim
        k = self.pole_order
        coeffs = []
        for m in range(-k, 0):
            j = -m
            c = self.lambda_coefficient(j) if j >= 2 else self.exponent
            coeffs.append(c)
        ser = MatrixSeries.exact(n, -k, coeffs)
        return ser.truncate(hi) if hi >= -k else ser


def normal_form_connection(nf: NormalForm) -> Connection:
    """The normal form as a global connection with a single finite pole."""
    if nf.position is None:
        raise ValueError("normal form at infinity has no finite-pole realization")
    n = nf.dim
    stack = [nf.exponent]
    for j in range(2, nf.pole_order + 1):
        stack.append(nf.lambda_coefficient(j))
    return Connection.make(n, Matrix.zeros(n, n), [(nf.position, stack)])


def nonresonance_check(nf: NormalForm) -> bool:
    """True iff ad(L) on the centralizer of Lambda has no nonzero integer
    eigenvalue.

    The centralizer is the block-diagonal algebra determined by the
    groups, so ad(L) is assembled blockwise and its characteristic
    polynomial is scanned for integer roots.
    """
    roots: set[int] = set()
    for g in nf.groups:
        d = g.mult
        idx = lambda p, q: p * d + q
        entries = [[ZERO] * (d * d) for _ in range(d * d)]
        for p in range(d):
            for q in range(d):
                col = idx(p, q)
                # ad(E_pq) = E_pq L - L E_pq
                for j in range(d):
                    entries[idx(p, j)][col] = entries[idx(p, j)][col] + g.L[q, j]
                for i in range(d):
                    entries[idx(i, q)][col] = entries[idx(i, q)][col] - g.L[i, p]
        ad = Matrix.from_rows(entries)
        roots.update(integer_roots(charpoly(ad)))
    return all(r == 0 for r in roots)


# -- gauge action -------------------------------------------------------------


@dataclass(frozen=True)
class GaugeJet:
    """Polynomial jet g(z) = g_0 + g_1 z + ... in the local coordinate."""

    coeffs: tuple[Matrix, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("empty jet")
        n = self.coeffs[0].rows
        for c in self.coeffs:
            if c.shape != (n, n):
                raise ValueError("jet coefficient shapes differ")

    @property
    def dim(self) -> int:
        return self.coeffs[0].rows

    def series(self) -> MatrixSeries:
        return MatrixSeries.exact(self.dim, 0, list(self.coeffs))

    def multiply(self, other: "GaugeJet") -> "GaugeJet":
        prod = self.series() * other.series()
        top = len(self.coeffs) + len(other.coeffs) - 2
        coeffs = [prod.coefficient(m) for m in range(0, top + 1)]
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs.pop()
        return GaugeJet(tuple(coeffs))

    def constant_invertible(self) -> bool:
        return inverse(self.coeffs[0]) is not None


def gauge_transform(a_series: MatrixSeries, g: GaugeJet, hi: int) -> MatrixSeries:
    """g[A] = g A g^-1 + g' g^-1 as a local series through order hi.

    a_series must be known far enough; with pole order k the inverse jet
    is needed through order hi + k.
    """
    k = max(0, -a_series.lo)
    gser = g.series()
    ginv = gser.inverse(hi + k)
    out = (gser * a_series * ginv) + (gser.derivative() * ginv)
    return out.truncate(hi)


def gauge_transform_connection(a: Connection, center: Scalar, g: GaugeJet, hi: int) -> MatrixSeries:
    own = a.pole_at(center)
    k = own.order if own else 0
    need = hi + 2 * k + len(g.coeffs)
    return gauge_transform(laurent_series(a, center, need), g, hi)


# -- truncated formal matching ------------------------------------------------


def _centralizer_basis(nf: NormalForm) -> list[Matrix]:
    """Basis of {h : h commutes with every Lambda coefficient and with L}."""
    n = nf.dim
    mats = [nf.exponent] + [nf.lambda_coefficient(j) for j in range(2, nf.pole_order + 1)]
    eqs = [
        MatEquation(
            terms=((Matrix.identity(n), m), (-m, Matrix.identity(n))),
            rhs=Matrix.zeros(n, n),
        )
        for m in mats
    ]
    return kernel_matrix_equations((n, n), eqs)


def formal_match_series(
    a_series: MatrixSeries, nf: NormalForm, order: Optional[int] = None
) -> Optional[GaugeJet]:
    """Truncated formal gauge from the normal form to the given local series.

    Solves g' = A g - g A0 through jet order `order` (default pole order
    plus six) as one exact linear system, with the constant term pinned
    by projecting onto the centralizer of the normal form: the component
    of g_0 along the centralizer is required to equal that of the
    identity.  Returns None when no jet matches; raises
    NonResonantRequiredError when the normal form is resonant.
    """
    if not nonresonance_check(nf):
        raise NonResonantRequiredError("formal matching needs a non-resonant normal form")
    n = nf.dim
    if a_series.size != n:
        return None
    k = max(nf.pole_order, -a_series.lo)
    big_n = order if order is not None else k + 6
    if a_series.hi is not None and a_series.hi < big_n - k:
        raise ValueError("local series not known far enough for requested order")
    nf_ser = nf.series(big_n)
    n_unknown = big_n + 1
    nsq = n * n

    def a_coef(m: int) -> Matrix:
        if a_series.hi is not None and m > a_series.hi:
            return Matrix.zeros(n, n)
        return a_series.coefficient(m)

    def nf_coef(m: int) -> Matrix:
        return nf_ser.coefficient(m) if m >= -k else Matrix.zeros(n, n)

    rows: list[list[Scalar]] = []
    rhs: list[list[Scalar]] = []

    def add_block_rows(shell_terms: dict[int, list[tuple[Matrix, Matrix]]], rhs_m: Matrix):
        # shell_terms: unknown index -> list of (L, R) with sum L g_idx R
        for i in range(n):
            for jj in range(n):
                row = [ZERO] * (n_unknown * nsq)
                for idx, terms in shell_terms.items():
                    base = idx * nsq
                    for lhs, rhs_mat in terms:
                        for p in range(n):
                            lip = lhs[i, p]
                            if lip.is_zero():
                                continue
                            for q in range(n):
                                rqj = rhs_mat[q, jj]
                                if not rqj.is_zero():
                                    row[base + p * n + q] = row[base + p * n + q] + lip * rqj
                rows.append(row)
                rhs.append([rhs_m[i, jj]])

    ident = Matrix.identity(n)
    for m in range(-k, big_n - k + 1):
        shell: dict[int, list[tuple[Matrix, Matrix]]] = {}
        for j in range(0, n_unknown):
            terms = []
            a_m = a_coef(m - j)
            if not a_m.is_zero():
                terms.append((a_m, ident))
            b_m = nf_coef(m - j)
            if not b_m.is_zero():
                terms.append((-ident, b_m))
            if j == m + 1 and 0 <= m + 1 <= big_n:
                terms.append((Matrix.scalar(n, Scalar.of(-(m + 1))), ident))
            if terms:
                shell[j] = terms
        add_block_rows(shell, Matrix.zeros(n, n))

    # normalization rows: <g_0, c> = <1, c> for the centralizer basis
    cent = _centralizer_basis(nf)
    for c in cent:
        row = [ZERO] * (n_unknown * nsq)
        target = ZERO
        for p in range(n):
            for q in range(n):
                row[p * n + q] = c[p, q].conj()
                if p == q:
                    target = target + c[p, q].conj()
        rows.append(row)
        rhs.append([target])

    sol = solve(Matrix.from_rows(rows), Matrix.from_rows(rhs))
    jet = None
    if sol is not None:
        coeffs = [
            Matrix(n, n, tuple(sol[j * nsq + p, 0] for p in range(nsq))) for j in range(n_unknown)
        ]
        jet = GaugeJet(tuple(coeffs))
        if not jet.constant_invertible():
            jet = None
    if jet is None:
        # fall back to a scan of the homogeneous solution space
        hom = Matrix.from_rows(rows[: (big_n + 1) * nsq])
        jet = _scan_jet_kernel(kernel(hom), n, n_unknown)
        if jet is None:
            return None
    # verify the match exactly through the guaranteed order
    check_hi = big_n - k
    transformed = gauge_transform(nf_ser, jet, check_hi)
    diff = transformed - a_series.truncate(check_hi)
    if not diff.is_zero_through(check_hi):
        return None
    return jet


def _scan_jet_kernel(basis_vecs, n: int, n_unknown: int, attempts: int = 64, seed: int = 0):
    nsq = n * n
    cands = []
    for v in basis_vecs:
        cands.append(v)
    rng = random.Random(seed)
    for _ in range(attempts if basis_vecs else 0):
        comb = [ZERO] * (n_unknown * nsq)
        for v in basis_vecs:
            f = Scalar.of(rng.randint(-3, 3))
            comb = [a + b * f for a, b in zip(comb, v)]
        cands.append(tuple(comb))
    for v in cands:
        coeffs = [Matrix(n, n, tuple(v[j * nsq + p] for p in range(nsq))) for j in range(n_unknown)]
        jet = GaugeJet(tuple(coeffs))
        if jet.constant_invertible():
            return jet
    return None


def formal_match(
    a: Connection, center: Scalar, nf: NormalForm, order: Optional[int] = None
) -> Optional[GaugeJet]:
    """Connection-level wrapper around formal_match_series."""
    own = a.pole_at(center)
    k_a = own.order if own else 0
    k = max(nf.pole_order, k_a)
    big_n = order if order is not None else k + 6
    ser = laurent_series(a, center, big_n)
    return formal_match_series(ser, nf, order=big_n)

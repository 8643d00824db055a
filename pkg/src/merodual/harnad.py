"""AHHP representations and the duality calculus built on them.

An AhhpRep packages A = (S + Q(x-T)^{-1}P)dx through four matrices with
T block-diagonalized over its (rational-Gaussian) eigenvalues.  This
module provides the realization functor phi, its canonical section
kappa, the quarter-turn sigma and the Harnad dual hd = phi o sigma o
kappa together with its inverse, addition of scalar logarithmic terms,
middle convolution, the stability/irreducibility/minimality tests, and
the truncated-jet group action with its moment map.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .connection import Connection, NormalForm, nonresonance_check  # noqa: F401
from .errors import (
    NotDefinedError,
    NotStableError,
    ReblockFailure,
    SingularLeadingCoefficientError,
    ZeroDimensionError,
    ZeroPolynomialError,
)
from .linalg import (
    MatEquation,
    Quotient,
    algebra_closure_dim,
    invariant_closure,
    inverse,
    kernel,
    kernel_matrix_equations,
    rank,
    rref,
    shift_block,
    solve_matrix_equations,
)
from .matrix import Matrix
from .poly import Polynomial, charpoly, integer_roots
from .scalar import ONE, ZERO, Scalar, scalar_key
from .series import MatrixSeries


def nilpotency_index(m: Matrix) -> int:
    """Smallest e >= 1 with m^e = 0; raises if m is not nilpotent."""
    if not m.is_square():
        raise ValueError("nilpotency index needs a square matrix")
    if m.rows == 0:
        return 1
    p = m
    for e in range(1, m.rows + 1):
        if p.is_zero():
            return e
        p = p @ m
    raise ValueError("matrix is not nilpotent")


@dataclass(frozen=True)
class RepBlock:
    """One summand of T = t·1 + N with its Q and P slices."""

    t: Scalar
    n: Matrix
    q: Matrix
    p: Matrix

    @property
    def dim(self) -> int:
        return self.n.rows


@dataclass(frozen=True)
class AhhpRep:
    dim_v: int
    s: Matrix
    blocks: tuple[RepBlock, ...]

    def __post_init__(self):
        if self.s.shape != (self.dim_v, self.dim_v):
            raise ValueError("S shape mismatch")
        seen = set()
        for b in self.blocks:
            d = b.n.rows
            if b.n.shape != (d, d) or b.q.shape != (self.dim_v, d) or b.p.shape != (d, self.dim_v):
                raise ValueError("block shape mismatch")
            nilpotency_index(b.n)
            key = scalar_key(b.t)
            if key in seen:
                raise ValueError("block positions must be pairwise distinct")
            seen.add(key)
        keys = [scalar_key(b.t) for b in self.blocks]
        if keys != sorted(keys):
            raise ValueError("blocks must be sorted by position; use AhhpRep.make")

    @staticmethod
    def make(dim_v: int, s: Matrix, blocks: Sequence[RepBlock]) -> "AhhpRep":
        kept = [b for b in blocks if b.n.rows > 0]
        kept.sort(key=lambda b: scalar_key(b.t))
        return AhhpRep(dim_v, s, tuple(kept))

    @property
    def dim_w(self) -> int:
        return sum(b.dim for b in self.blocks)

    @property
    def t_full(self) -> Matrix:
        parts = [Matrix.scalar(b.dim, b.t) + b.n for b in self.blocks]
        return Matrix.block_diag(parts) if parts else Matrix.zeros(0, 0)

    @property
    def q_full(self) -> Matrix:
        if not self.blocks:
            return Matrix.zeros(self.dim_v, 0)
        return Matrix.hstack([b.q for b in self.blocks])

    @property
    def p_full(self) -> Matrix:
        if not self.blocks:
            return Matrix.zeros(0, self.dim_v)
        return Matrix.vstack([b.p for b in self.blocks])

    @property
    def gamma(self) -> Matrix:
        return Matrix.assemble([[self.s, self.q_full], [self.p_full, self.t_full]])

    def block_offsets(self) -> list[int]:
        offs = []
        o = 0
        for b in self.blocks:
            offs.append(o)
            o += b.dim
        return offs


# -- the functor phi and its canonical section -------------------------------


def phi(h: AhhpRep) -> Connection:
    """Realize the representation as a connection: S + Q(x-T)^{-1}P."""
    poles = []
    for b in h.blocks:
        stack = []
        npow = Matrix.identity(b.dim)
        for _ in range(nilpotency_index(b.n)):
            stack.append(b.q @ npow @ b.p)
            npow = npow @ b.n
        poles.append((b.t, stack))
    return Connection.make(h.dim_v, h.s, poles)


def kappa(a: Connection) -> AhhpRep:
    """Canonical representation of a connection: phi(kappa(a)) = a exactly.

    At each pole the space W_i is the quotient of V (x) C[x]/(x^k)
    (basis 1, x, ..., x^{k-1}) by the kernel of multiplication by the
    principal part polynomial; P embeds v (x) 1, Q reads off the top
    coefficient after multiplying, N is induced multiplication by x.
    """
    if a.dim < 1:
        raise ZeroDimensionError("kappa needs a connection of dimension at least one")
    n = a.dim
    blocks = []
    for pole in a.poles:
        k = pole.order
        zeros_n = Matrix.zeros(n, n)
        grid = [
            [pole.coeffs[k + p - q - 1] if q >= p else zeros_n for p in range(k)]
            for q in range(k)
        ]
        ahat = Matrix.assemble(grid)
        quo = Quotient(n * k, kernel(ahat))
        w = quo.dim
        if w == 0:
            continue
        proj = quo.project_matrix
        emb = quo.embed_matrix
        mult_x = shift_block(n, k).transpose()
        n_mat = proj @ mult_x @ emb
        p_mat = proj @ Matrix.identity(n).embed(n * k, n, 0, 0)
        q_mat = (ahat @ emb).block((k - 1) * n, k * n, 0, w)
        blocks.append(RepBlock(pole.position, n_mat, q_mat, p_mat))
    return AhhpRep.make(n, a.constant_term, blocks)


# -- sigma and re-blocking -----------------------------------------------------

_SNAP_DENOMS = (1, 2, 6, 12, 60, 1000, 10**4, 10**6, 10**9, 10**12)


def _float_roots(p: Polynomial) -> Optional[list[complex]]:
    deg = p.degree()
    if deg <= 0:
        return []
    try:
        cs = [complex(float(c.re), float(c.im)) for c in p.coeffs]
    except OverflowError:
        return None
    lead = cs[-1]
    monic = [c / lead for c in cs]
    radius = 1.0 + max(abs(c) for c in monic[:-1])
    z = [(0.4 + 0.9j) ** (i + 1) * radius for i in range(deg)]
    for _ in range(600):
        moved = 0.0
        for i in range(deg):
            zi = z[i]
            num = 0j
            for c in reversed(monic):
                num = num * zi + c
            den = 1.0 + 0j
            for j in range(deg):
                if j != i:
                    den *= zi - z[j]
            if den == 0:
                den = 1e-30
            dz = num / den
            z[i] = zi - dz
            moved = max(moved, abs(dz))
        if moved < 1e-13 * max(1.0, radius):
            break
    return z


def _snap_candidates(z: complex) -> list[Scalar]:
    out = []
    seen = set()
    for d in _SNAP_DENOMS:
        re = Fraction(z.real).limit_denominator(d)
        im = Fraction(z.imag).limit_denominator(d)
        key = (re, im)
        if key not in seen:
            seen.add(key)
            out.append(Scalar(re, im))
    return out


def qi_linear_factorization(p: Polynomial) -> Optional[list[tuple[Scalar, int]]]:
    """Factor a polynomial into linear factors over Q(i), or None.

    Float root estimates are snapped to small rationals and verified by
    exact evaluation, then deflated; a verified answer is exact, and
    None means no complete factorization was found.
    """
    work = p
    counts: dict[tuple, tuple[Scalar, int]] = {}
    for _ in range(p.degree() + 1):
        if work.degree() <= 0:
            break
        zs = _float_roots(work)
        if zs is None:
            return None
        progressed = False
        for z in zs:
            for cand in _snap_candidates(z):
                if scalar_key(cand) in counts and not work.eval(cand).is_zero():
                    continue
                while work.degree() > 0 and work.eval(cand).is_zero():
                    k = scalar_key(cand)
                    prev = counts.get(k, (cand, 0))
                    counts[k] = (cand, prev[1] + 1)
                    work = work.divide_linear(cand)
                    progressed = True
        if not progressed:
            return None
    if work.degree() > 0:
        return None
    return sorted(counts.values(), key=lambda rm: scalar_key(rm[0]))


def _reblock(dim_v: int, s_new: Matrix, t_cand: Matrix, q_cand: Matrix, p_cand: Matrix) -> AhhpRep:
    """Assemble a representation whose T is given as a raw matrix.

    The matrix is split into generalized eigenspaces over Q(i); failure
    to factor its characteristic polynomial raises ReblockFailure.
    """
    m = t_cand.rows
    if m == 0:
        return AhhpRep.make(dim_v, s_new, [])
    fact = qi_linear_factorization(charpoly(t_cand))
    if fact is None:
        raise ReblockFailure("eigenvalues of the new T do not lie in Q(i)")
    cols: list[tuple] = []
    ranges = []
    for lam, mult in fact:
        shifted = t_cand - Matrix.scalar(m, lam)
        basis = kernel(shifted.power(mult))
        if len(basis) != mult:
            raise ReblockFailure("generalized eigenspace dimension mismatch")
        ranges.append((lam, len(cols), len(cols) + mult))
        cols.extend(basis)
    u = Matrix.build(m, m, lambda i, j: cols[j][i])
    u_inv = inverse(u)
    if u_inv is None:
        raise ReblockFailure("generalized eigenvectors do not span")
    t_blocked = u_inv @ t_cand @ u
    q_new = q_cand @ u
    p_new = u_inv @ p_cand
    blocks = []
    for lam, lo, hi in ranges:
        sub = t_blocked.block(lo, hi, lo, hi)
        n_mat = sub - Matrix.scalar(hi - lo, lam)
        blocks.append(
            RepBlock(lam, n_mat, q_new.block(0, dim_v, lo, hi), p_new.block(lo, hi, 0, dim_v))
        )
    rep = AhhpRep.make(dim_v, s_new, blocks)
    # invariance of generalized eigenspaces makes T block diagonal; trust but verify
    if not (rep.t_full - u_inv @ t_cand @ u).is_zero():
        raise ReblockFailure("T did not block-diagonalize")
    return rep


def sigma(h: AhhpRep) -> AhhpRep:
    """(V,W;S,T,Q,P) -> (W,V;-T,S,P,-Q), with the new T re-blocked."""
    return _reblock(h.dim_w, -h.t_full, h.s, h.p_full, -h.q_full)


def sigma_inv(h: AhhpRep) -> AhhpRep:
    """(V,W;S,T,Q,P) -> (W,V;T,-S,-P,Q); inverse of sigma."""
    return _reblock(h.dim_w, h.t_full, -h.s, -h.p_full, h.q_full)


# -- dualities ----------------------------------------------------------------


def hd(a: Connection) -> Connection:
    """Harnad dual: phi o sigma o kappa; output -(T + P(y-S)^{-1}Q)dy."""
    return phi(sigma(kappa(a)))


def ihd(a: Connection) -> Connection:
    """Inverse Harnad dual: phi o sigma_inv o kappa."""
    return phi(sigma_inv(kappa(a)))


def add_alpha(a: Connection, alpha: Scalar) -> Connection:
    """Add alpha·1/(y-0) dy, creating or augmenting the pole at 0."""
    if alpha.is_zero():
        return a
    ident = Matrix.identity(a.dim)
    poles = []
    seen_zero = False
    for p in a.poles:
        if p.position.is_zero():
            seen_zero = True
            stack = list(p.coeffs)
            stack[0] = stack[0] + ident.scale(alpha)
            poles.append((p.position, stack))
        else:
            poles.append((p.position, list(p.coeffs)))
    if not seen_zero:
        poles.append((Scalar.of(0), [ident.scale(alpha)]))
    return Connection.make(a.dim, a.constant_term, poles)


@dataclass(frozen=True)
class McResult:
    connection: Connection
    admissible: bool
    hits: tuple[str, ...]


def _admissibility_hits(a: Connection, alpha: Scalar) -> tuple[str, ...]:
    """Integer resonances blocking the sufficient admissibility condition.

    For each finite pole the residue eigenvalues lambda must keep
    lambda + alpha off the integers; the exponent at infinity (minus the
    residue sum) must avoid integer eigenvalues altogether.  At poles of
    order > 1 the residue stands in for the log-exponent, which is a
    desk-scale surrogate.
    """
    hits = []
    total = Matrix.zeros(a.dim, a.dim)
    for p in a.poles:
        res = p.coeffs[0]
        total = total + res
        shifted = charpoly(res).compose_linear(Scalar.of(1), -alpha)
        try:
            roots = integer_roots(shifted)
        except ZeroPolynomialError:
            roots = [0]
        for r in roots:
            hits.append(f"pole {p.position}: residue eigenvalue {r} - alpha")
    try:
        inf_roots = integer_roots(charpoly(-total))
    except ZeroPolynomialError:
        inf_roots = [0]
    for r in inf_roots:
        hits.append(f"infinity: exponent eigenvalue {r}")
    return tuple(hits)


def mc_alpha(a: Connection, alpha: Scalar) -> McResult:
    """Middle convolution ihd o add_{-alpha} o hd with admissibility report."""
    if a.dim == 1 and not a.poles:
        raise NotDefinedError("middle convolution is not defined on scalar constant forms")
    out = ihd(add_alpha(hd(a), -alpha))
    hits = _admissibility_hits(a, alpha)
    return McResult(out, not hits, hits)


# -- stability and irreducibility ---------------------------------------------


def is_stable(h: AhhpRep) -> bool:
    """No proper T-invariant subspace contains Im P; none hides in Ker Q."""
    m = h.dim_w
    if m == 0:
        return True
    t = h.t_full
    p_cols = [h.p_full.col(j) for j in range(h.dim_v)]
    if len(invariant_closure(t, p_cols)) != m:
        return False
    qt = h.q_full.transpose()
    q_rows = [qt.col(j) for j in range(h.dim_v)]
    return len(invariant_closure(t.transpose(), q_rows)) == m


def is_irreducible_s(a: Connection) -> bool:
    """No common invariant subspace for all coefficients (Burnside test)."""
    if a.dim < 1:
        raise ZeroDimensionError("irreducibility needs dimension at least one")
    gens = [a.constant_term]
    for p in a.poles:
        gens.extend(p.coeffs)
    return algebra_closure_dim(gens) == a.dim * a.dim


def is_irreducible_h(h: AhhpRep) -> bool:
    """Burnside test on the algebra generated by gamma and the V-projector."""
    n = h.dim_v + h.dim_w
    if n < 1:
        raise ZeroDimensionError("irreducibility needs dimension at least one")
    pi_v = Matrix.identity(h.dim_v).embed(n, n, 0, 0)
    return algebra_closure_dim([h.gamma, pi_v]) == n * n


# -- the truncated jet action and its moment map -------------------------------


@dataclass(frozen=True)
class GTildeElement:
    """Per block, a polynomial jet g_0 + g_1 x + ... of length k_i."""

    jets: tuple[tuple[Matrix, ...], ...]


def identity_gtilde(h: AhhpRep) -> GTildeElement:
    jets = []
    for b in h.blocks:
        k = nilpotency_index(b.n)
        jet = [Matrix.identity(h.dim_v)]
        jet += [Matrix.zeros(h.dim_v, h.dim_v) for _ in range(k - 1)]
        jets.append(tuple(jet))
    return GTildeElement(tuple(jets))


def _inverse_jet(jet: Sequence[Matrix]) -> list[Matrix]:
    g0_inv = inverse(jet[0])
    if g0_inv is None:
        raise SingularLeadingCoefficientError("jet constant term is singular")
    n = jet[0].rows
    out = [g0_inv]
    for m in range(1, len(jet)):
        acc = Matrix.zeros(n, n)
        for j in range(1, m + 1):
            acc = acc + jet[j] @ out[m - j]
        out.append((-g0_inv) @ acc)
    return out


def gtilde_act(g: GTildeElement, h: AhhpRep) -> AhhpRep:
    """Q'_i = sum_j g_j Q_i N^j, P'_i = sum_j N^j P_i gbar_j; S, T fixed."""
    if len(g.jets) != len(h.blocks):
        raise ValueError("one jet per block required")
    new_blocks = []
    for jet, b in zip(g.jets, h.blocks):
        k = nilpotency_index(b.n)
        if len(jet) != k:
            raise ValueError("jet length must equal the block nilpotency index")
        gbar = _inverse_jet(jet)
        npow = [Matrix.identity(b.dim)]
        for _ in range(k - 1):
            npow.append(npow[-1] @ b.n)
        q_new = Matrix.zeros(h.dim_v, b.dim)
        p_new = Matrix.zeros(b.dim, h.dim_v)
        for j in range(k):
            q_new = q_new + jet[j] @ b.q @ npow[j]
            p_new = p_new + npow[j] @ b.p @ gbar[j]
        new_blocks.append(RepBlock(b.t, b.n, q_new, p_new))
    return AhhpRep(h.dim_v, h.s, tuple(new_blocks))


@dataclass(frozen=True)
class MomentValue:
    """Per block, the principal-part coefficient stack [Q N^{j-1} P]_j."""

    stacks: tuple[tuple[Matrix, ...], ...]


def moment_map(h: AhhpRep) -> MomentValue:
    stacks = []
    for b in h.blocks:
        stack = []
        npow = Matrix.identity(b.dim)
        for _ in range(nilpotency_index(b.n)):
            stack.append(b.q @ npow @ b.p)
            npow = npow @ b.n
        stacks.append(tuple(stack))
    return MomentValue(tuple(stacks))


def infinitesimal_action(x: GTildeElement, h: AhhpRep) -> tuple[Matrix, Matrix]:
    """Derivative of the jet action at the identity: (dQ, dP) tangent pair."""
    if len(x.jets) != len(h.blocks):
        raise ValueError("one jet per block required")
    dq_parts = []
    dp_parts = []
    for jet, b in zip(x.jets, h.blocks):
        k = nilpotency_index(b.n)
        if len(jet) != k:
            raise ValueError("jet length must equal the block nilpotency index")
        npow = [Matrix.identity(b.dim)]
        for _ in range(k - 1):
            npow.append(npow[-1] @ b.n)
        dq = Matrix.zeros(h.dim_v, b.dim)
        dp = Matrix.zeros(b.dim, h.dim_v)
        for j in range(k):
            dq = dq + jet[j] @ b.q @ npow[j]
            dp = dp - npow[j] @ b.p @ jet[j]
        dq_parts.append(dq)
        dp_parts.append(dp)
    return Matrix.hstack(dq_parts), Matrix.vstack(dp_parts)


def moment_map_check(h: AhhpRep, x: GTildeElement, dq: Matrix, dp: Matrix) -> bool:
    """omega(rho(X), (dQ,dP)) = <dPhi(dQ,dP), X>, both sides exact."""
    rho_q, rho_p = infinitesimal_action(x, h)
    lhs = (rho_q @ dp).trace() - (dq @ rho_p).trace()
    rhs = ZERO
    offs = h.block_offsets()
    for jet, b, off in zip(x.jets, h.blocks, offs):
        k = nilpotency_index(b.n)
        dq_i = dq.block(0, h.dim_v, off, off + b.dim)
        dp_i = dp.block(off, off + b.dim, 0, h.dim_v)
        npow = [Matrix.identity(b.dim)]
        for _ in range(k - 1):
            npow.append(npow[-1] @ b.n)
        for j in range(k):
            delta = dq_i @ npow[j] @ b.p + b.q @ npow[j] @ dp_i
            rhs = rhs + (jet[j] @ delta).trace()
    return lhs == rhs


def conjugate_principal_stack(stack: Sequence[Matrix], jet: Sequence[Matrix]) -> list[Matrix]:
    """Principal part of g(x) (sum_j m_j x^-j) g(x)^{-1} for a polynomial jet."""
    if not stack:
        return []
    n = stack[0].rows
    k = len(stack)
    ser = MatrixSeries(n, -k, -1, tuple(reversed(list(stack))))
    gser = MatrixSeries.exact(n, 0, list(jet))
    ginv = gser.inverse(k - 1)
    return (gser * ser * ginv).truncate(-1).principal_part()


# -- the stability lemma -------------------------------------------------------


def _block_centralizer_equations(b: RepBlock) -> list[MatEquation]:
    d = b.dim
    eqs = [
        MatEquation(
            terms=((Matrix.identity(d), b.n), (-b.n, Matrix.identity(d))),
            rhs=Matrix.zeros(d, d),
        )
    ]
    npow = Matrix.identity(d)
    for _ in range(nilpotency_index(b.n)):
        eqs.append(
            MatEquation(
                terms=((b.q @ npow, b.p),),
                rhs=Matrix.zeros(b.q.rows, b.q.rows),
            )
        )
        npow = npow @ b.n
    return eqs


def lemma_stability_check(h: AhhpRep) -> dict:
    """Dimension of {C in the T-centralizer : Q(x-T)^{-1}CP = 0}; 0 iff unique
    factors exist in the recovery problem."""
    if not is_stable(h):
        raise NotStableError("stability lemma requires a stable representation")
    total = 0
    for b in h.blocks:
        total += len(kernel_matrix_equations((b.dim, b.dim), _block_centralizer_equations(b)))
    return {"kernel_dim": total}


def recover_centralizer(h: AhhpRep, q_new: Matrix, p_new: Matrix) -> Optional[Matrix]:
    """The unique T-commuting C with q_new = Q C and p_new = C P, or None.

    Existence is guaranteed when the inputs share the realization
    Q(x-T)^{-1} p_new = q_new (x-T)^{-1} P; inconsistent inputs yield None.
    """
    if not is_stable(h):
        raise NotStableError("stability lemma requires a stable representation")
    blocks = []
    offs = h.block_offsets()
    for b, off in zip(h.blocks, offs):
        d = b.dim
        qn = q_new.block(0, h.dim_v, off, off + d)
        pn = p_new.block(off, off + d, 0, h.dim_v)
        eqs = [
            MatEquation(
                terms=((Matrix.identity(d), b.n), (-b.n, Matrix.identity(d))),
                rhs=Matrix.zeros(d, d),
            ),
            MatEquation(terms=((b.q, Matrix.identity(d)),), rhs=qn),
            MatEquation(terms=((Matrix.identity(d), b.p),), rhs=pn),
        ]
        c = solve_matrix_equations((d, d), eqs)
        if c is None:
            return None
        blocks.append(c)
    return Matrix.block_diag(blocks) if blocks else Matrix.zeros(0, 0)


# -- minimality criterion ------------------------------------------------------


def minimal_criterion(h: AhhpRep) -> bool:
    """Per block, P_iQ_i + k·1 must induce Ker N_i ~ Coker N_i for all k in Z."""
    for b in h.blocks:
        d = b.dim
        if d == 0:
            continue
        ker_vecs = kernel(b.n)
        if not ker_vecs:
            continue
        r = len(ker_vecs)
        kmat = Matrix.build(d, r, lambda i, j: ker_vecs[j][i])
        coker = Quotient(d, [b.n.col(j) for j in range(d)])
        m_part = coker.project_matrix @ (b.p @ b.q) @ kmat
        j_part = coker.project_matrix @ kmat
        grid = [
            [Polynomial((m_part[i, j], j_part[i, j])) for j in range(r)]
            for i in range(r)
        ]
        det_poly = _poly_det(grid)
        try:
            roots = integer_roots(det_poly)
        except ZeroPolynomialError:
            return False
        if roots:
            return False
    return True


def _poly_det(grid: list[list[Polynomial]]) -> Polynomial:
    from .poly import poly_matrix_det

    return poly_matrix_det(grid)


# -- rank factorization (mc realization) ---------------------------------------


def rank_factorize(m: Matrix, alpha: Scalar) -> tuple[Matrix, Matrix]:
    """(Q_a, P_a) with P_a Q_a = m + alpha·1, Q_a full row rank, P_a full column rank."""
    if not m.is_square():
        raise ValueError("rank_factorize needs a square matrix")
    n = m.rows
    shifted = m + Matrix.scalar(n, alpha)
    reduced, pivots = rref(shifted)
    r = len(pivots)
    q_a = reduced.block(0, r, 0, n)
    p_a = Matrix.build(n, r, lambda i, j: shifted[i, pivots[j]])
    return q_a, p_a


# -- assorted constructors ------------------------------------------------------


def direct_sum_rep(h1: AhhpRep, h2: AhhpRep) -> AhhpRep:
    """Block-diagonal sum; blocks at equal positions merge."""
    n1, n2 = h1.dim_v, h2.dim_v
    s = Matrix.block_diag([h1.s, h2.s])
    positions = {scalar_key(b.t): b.t for b in h1.blocks}
    for b in h2.blocks:
        positions.setdefault(scalar_key(b.t), b.t)
    blocks = []
    by_key_1 = {scalar_key(b.t): b for b in h1.blocks}
    by_key_2 = {scalar_key(b.t): b for b in h2.blocks}
    for key, t in positions.items():
        b1 = by_key_1.get(key)
        b2 = by_key_2.get(key)
        d1 = b1.dim if b1 else 0
        d2 = b2.dim if b2 else 0
        nmat = Matrix.block_diag(
            [b1.n if b1 else Matrix.zeros(0, 0), b2.n if b2 else Matrix.zeros(0, 0)]
        )
        q1 = b1.q if b1 else Matrix.zeros(n1, 0)
        q2 = b2.q if b2 else Matrix.zeros(n2, 0)
        q = Matrix.assemble([[q1, Matrix.zeros(n1, d2)], [Matrix.zeros(n2, d1), q2]])
        p1 = b1.p if b1 else Matrix.zeros(0, n1)
        p2 = b2.p if b2 else Matrix.zeros(0, n2)
        p = Matrix.assemble([[p1, Matrix.zeros(d1, n2)], [Matrix.zeros(d2, n1), p2]])
        blocks.append(RepBlock(t, nmat, q, p))
    return AhhpRep.make(n1 + n2, s, blocks)


def rep_intertwiner(
    h1: AhhpRep, h2: AhhpRep, attempts: int = 64, seed: int = 0
) -> Optional[Matrix]:
    """Invertible f with f T1 = T2 f, Q2 f = Q1, f P1 = P2, or None.

    With equal phi and stability on both sides such an f exists and
    makes 1_V + f an isomorphism of representations.
    """
    import random as _random

    if h1.dim_v != h2.dim_v or h1.dim_w != h2.dim_w:
        return None
    w1, w2 = h1.dim_w, h2.dim_w
    t1, t2 = h1.t_full, h2.t_full
    eqs = [
        MatEquation(
            terms=((Matrix.identity(w2), t1), (-t2, Matrix.identity(w1))),
            rhs=Matrix.zeros(w2, w1),
        ),
        MatEquation(terms=((h2.q_full, Matrix.identity(w1)),), rhs=h1.q_full),
        MatEquation(terms=((Matrix.identity(w2), h1.p_full),), rhs=h2.p_full),
    ]
    part = solve_matrix_equations((w2, w1), eqs)
    if part is None:
        return None
    hom = kernel_matrix_equations(
        (w2, w1),
        [MatEquation(terms=eq.terms, rhs=Matrix.zeros(*eq.rhs.shape)) for eq in eqs],
    )
    cands = [part] + [part + hmat for hmat in hom]
    rng = _random.Random(seed)
    for _ in range(attempts if hom else 0):
        c = part
        for hmat in hom:
            c = c + hmat.scale(Scalar.of(rng.randint(-3, 3)))
        cands.append(c)
    for c in cands:
        if inverse(c) is not None:
            return c
    return None


def normal_form_realization(nf: NormalForm) -> AhhpRep:
    """Closed-form representation of a normal form at a finite point.

    Irregular groups contribute a shift block with X = (lambda_k ...
    lambda_2 L) and Y the bottom embedding; a logarithmic group
    contributes the quotient by Ker L.
    """
    if nf.position is None:
        raise ValueError("realization needs a finite position")
    x_parts = []
    y_parts = []
    n_parts = []
    dims_v = [g.mult for g in nf.groups]
    for g in nf.groups:
        d = g.mult
        if g.lambda_coeffs:
            k = g.pole_order
            row = []
            for p in range(k - 1):
                row.append(Matrix.scalar(d, g.lambda_coeffs[k - p - 2]))
            row.append(g.L)
            x_parts.append(Matrix.hstack(row))
            y_parts.append(Matrix.identity(d).embed(d * k, d, (k - 1) * d, 0))
            n_parts.append(shift_block(d, k))
        else:
            quo = Quotient(d, kernel(g.L))
            x_parts.append(g.L @ quo.embed_matrix)
            y_parts.append(quo.project_matrix)
            n_parts.append(Matrix.zeros(quo.dim, quo.dim))
    dims_w = [x.cols for x in x_parts]
    q_grid = [
        [
            x_parts[a] if a == bidx else Matrix.zeros(dims_v[a], dims_w[bidx])
            for bidx in range(len(nf.groups))
        ]
        for a in range(len(nf.groups))
    ]
    p_grid = [
        [
            y_parts[a] if a == bidx else Matrix.zeros(dims_w[a], dims_v[bidx])
            for bidx in range(len(nf.groups))
        ]
        for a in range(len(nf.groups))
    ]
    n = nf.dim
    if sum(dims_w) == 0:
        return AhhpRep.make(n, Matrix.zeros(n, n), [])
    block = RepBlock(
        nf.position,
        Matrix.block_diag(n_parts),
        Matrix.assemble(q_grid),
        Matrix.assemble(p_grid),
    )
    return AhhpRep.make(n, Matrix.zeros(n, n), [block])

"""q-convolution, q-middle convolution and their structural witnesses.

The parameter lambda enters only through the multiplier ``mu = q**lambda``,
so every operation here stays inside the scalar field of the input.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


from . import modp
from .errors import CollapseError, ConditionViolation
from .linalg import (
    Matrix, PolyMat, QuotientMap, Subspace, apply, induced_operator, is_invariant, kernel,
    largest_invariant_subspace_inside, preimage, quotient, rank, subspace_intersection,
    subspace_sum,
)
from .system import PartialFractionSystem, T_coefficients, canonical_from_partial_fraction


def _tol(E: PartialFractionSystem):
    return None if E.is_exact() else 1e-9


def _check_mu(mu):
    if mu == 0:
        raise ValueError("multiplier mu = q^lambda must be nonzero")


def _as_mu(mu, E: PartialFractionSystem):
    if isinstance(mu, (int, str)) and not isinstance(mu, bool):
        mu = Fraction(mu)
    if not E.is_exact():
        mu = complex(mu)
    _check_mu(mu)
    return mu


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvolutionResult:
    system: PartialFractionSystem
    F_hat: Matrix
    mu: object
    source: PartialFractionSystem

    @property
    def F(self) -> tuple:
        return self.system.B

    @property
    def F_inf(self) -> Matrix:
        return self.system.B_inf


def _block_row(row_index: int, blocks: Sequence[Matrix], nblocks: int) -> Matrix:
    m = blocks[0].nrows
    exact = all(b.is_exact() for b in blocks)
    Z = Matrix.zeros(m, m, exact)
    return Matrix.blocks([list(blocks) if r == row_index else [Z] * nblocks for r in range(nblocks)])


def q_convolution(E: PartialFractionSystem, mu) -> ConvolutionResult:
    mu = _as_mu(mu, E)
    m, N = E.m, E.N
    Bs = E.residues()
    shift = Matrix.scalar(m, 1 - mu)
    F = []
    for i in range(1, N + 1):
        row = list(Bs)
        row[i] = row[i] - shift
        F.append(_block_row(i, row, N + 1))
    F_hat = Matrix.blocks([list(Bs) for _ in range(N + 1)])
    F_inf = Matrix.identity((N + 1) * m, E.is_exact()) - F_hat
    out = PartialFractionSystem((N + 1) * m, E.q, E.poles, tuple(F), F_inf, E.name + "-conv")
    return ConvolutionResult(out, F_hat, mu, E)


def psi_shift(E: PartialFractionSystem, c) -> PartialFractionSystem:
    """Shift only the matrix at infinity by ``c``."""
    return PartialFractionSystem(E.m, E.q, E.poles, E.B, E.B_inf.add_scalar(c), E.name)


def Psi(E: PartialFractionSystem, mu) -> PartialFractionSystem:
    mu = _as_mu(mu, E)
    return psi_shift(q_convolution(E, mu).system, 1 - mu)


# ---------------------------------------------------------------------------
# the subspaces K and L
# ---------------------------------------------------------------------------

def _embed_block(v: Sequence, block: int, nblocks: int) -> list:
    m = len(v)
    z = v[0] * 0 if m else Fraction(0)
    out = [z] * (m * nblocks)
    out[block * m:(block + 1) * m] = list(v)
    return out


def K_space(E: PartialFractionSystem) -> Subspace:
    """Direct sum of the kernels of B_0, ..., B_N."""
    tol = _tol(E)
    n = E.N + 1
    vecs = []
    for i, Bi in enumerate(E.residues()):
        for v in kernel(Bi, tol).vectors:
            vecs.append(_embed_block(v, i, n))
    return Subspace(n * E.m, vecs, tol)


def L_space(E: PartialFractionSystem, mu, F_hat: Matrix | None = None) -> Subspace:
    mu = _as_mu(mu, E)
    tol = _tol(E)
    n = E.N + 1
    if F_hat is None:
        F_hat = Matrix.blocks([E.residues() for _ in range(n)])
    L = kernel(F_hat.add_scalar(-(1 - mu)), tol)
    if mu != 1:
        # diagonal copies of ker(A_inf - mu b_inf) = ker(B_inf - mu)
        h_space = kernel(E.B_inf.add_scalar(-mu), tol)
        diag = Subspace(n * E.m, [list(h) * n for h in h_space.vectors], tol)
        assert L == diag, "L is not the diagonal copy of ker(B_inf - mu)"
    return L


def dimension_formula(E: PartialFractionSystem, mu) -> int:
    """Predicted dimension of the middle convolution for mu != 1."""
    tol = _tol(E)
    A0_minus_1 = E.B0.scale(-1)  # A_0 - 1 = -B_0
    A_inf = E.B_inf.scale(E.b_inf)
    d = (E.N + 1) * E.m
    d -= sum(kernel(Bi, tol).dim for Bi in E.B)
    d -= kernel(A0_minus_1, tol).dim
    d -= kernel(A_inf.add_scalar(-mu * E.b_inf), tol).dim
    return d


@dataclass(frozen=True)
class MiddleConvolutionResult:
    system: PartialFractionSystem
    quotient: QuotientMap
    K: Subspace
    L: Subspace
    conv: ConvolutionResult

    @property
    def dim(self) -> int:
        return self.system.m


def _quotient_system(S: PartialFractionSystem, H: Subspace, name: str) -> tuple:
    if H.dim == H.ambient_dim:
        raise CollapseError("K + L is the whole space; the result is zero-dimensional")
    Q = quotient(H.ambient_dim, H)
    tol = _tol(S)
    Fb = tuple(induced_operator(Fi, Q, tol) for Fi in S.B)
    Fb_inf = induced_operator(S.B_inf, Q, tol)
    return PartialFractionSystem(Q.dim, S.q, S.poles, Fb, Fb_inf, name), Q


def middle_convolution(E: PartialFractionSystem, mu) -> MiddleConvolutionResult:
    mu = _as_mu(mu, E)
    conv = q_convolution(E, mu)
    K = K_space(E)
    L = L_space(E, mu, conv.F_hat)
    H = subspace_sum(K, L)
    sysq, Q = _quotient_system(conv.system, H, E.name + "-mc")
    if mu != 1:
        assert subspace_intersection(K, L).dim == 0
        assert sysq.m == dimension_formula(E, mu)
    return MiddleConvolutionResult(sysq, Q, K, L, conv)


def Psi_bar(E: PartialFractionSystem, mu) -> MiddleConvolutionResult:
    mu = _as_mu(mu, E)
    conv = q_convolution(E, mu)
    K = K_space(E)
    L = L_space(E, mu, conv.F_hat)
    shifted = psi_shift(conv.system, 1 - mu)
    sysq, Q = _quotient_system(shifted, subspace_sum(K, L), E.name + "-Psi")
    return MiddleConvolutionResult(sysq, Q, K, L, conv)


# ---------------------------------------------------------------------------
# conditions and irreducibility
# ---------------------------------------------------------------------------

def _joint_kernel(mats: Sequence[Matrix], n: int, tol) -> Subspace:
    if not mats:
        return Subspace.full(n)
    return kernel(Matrix.blocks([[M] for M in mats]), tol)


def condition_star_witness(residues: Sequence[Matrix], tol=None):
    """First index ``i`` whose B_i has an eigenvector killed by all other B_j, else None."""
    n = residues[0].nrows
    for i, Bi in enumerate(residues):
        W = _joint_kernel([Bj for j, Bj in enumerate(residues) if j != i], n, tol)
        if W.dim and largest_invariant_subspace_inside(Bi, W, tol).dim:
            return i
    return None


def check_condition_star(E: PartialFractionSystem) -> bool:
    return condition_star_witness(E.residues(), _tol(E)) is None


def check_condition_star_star(E: PartialFractionSystem) -> bool:
    return condition_star_witness([B.T for B in E.residues()], _tol(E)) is None


def _closure(vectors: Sequence[Sequence], mats: Sequence[Matrix], n: int) -> Subspace:
    S = Subspace(n, vectors)
    todo = list(S.vectors)
    while todo and S.dim < n:
        v = todo.pop()
        for M in mats:
            w = M @ v
            if not S.contains(w):
                S = Subspace(n, S.vectors + (tuple(w),))
                todo.append(tuple(w))
    return S


def _algebra_dim_exact(mats: Sequence[Matrix]) -> int:
    n = mats[0].nrows
    ident = Matrix.identity(n)
    span = Subspace(n * n, [tuple(x for r in ident.rows for x in r)])
    todo = [ident]
    while todo and span.dim < n * n:
        X = todo.pop()
        for g in mats:
            Y = X @ g
            flat = tuple(x for r in Y.rows for x in r)
            if not span.contains(flat):
                span = Subspace(n * n, span.vectors + (flat,))
                todo.append(Y)
    return span.dim


def _good_primes(mats: Sequence[Matrix], count: int = 2):
    out = []
    for p in modp.PRIMES:
        red = [modp.reduce_matrix(M.rows, p) for M in mats]
        if all(r is not None for r in red):
            out.append((p, red))
        if len(out) == count:
            break
    return out


def reducibility_witness(mats: Sequence[Matrix], seed: int = 0):
    """An exactly verified invariant subspace or non-scalar commuting matrix, else None.

    Candidates come from the coordinate and seeded random vectors, then from the
    trace-form radical and the commutant modulo two primes, lifted by CRT.
    """
    n = mats[0].nrows
    rng = random.Random(seed)
    seeds = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    seeds += [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(2)]
    for v in seeds:
        if any(v):
            S = _closure([v], mats, n)
            if S.dim < n:
                return S
    reds = _good_primes(mats)
    if len(reds) < 2:
        return None
    primes = [p for p, _ in reds]
    rad = [modp.radical_image(modp.algebra_basis(g, p), p) for p, g in reds]
    if 0 < rad[0].shape[0] < n:
        rows = modp.lift_rows(rad, primes)
        if rows is not None:
            U = Subspace(n, rows)
            if 0 < U.dim < n and all(is_invariant(M, U) for M in mats):
                return U
    com = [modp.commutant(g, p) for p, g in reds]
    if com[0].shape[0] > 1:
        rows = modp.lift_rows(com, primes)
        if rows is not None:
            for flat in rows:
                X = Matrix([flat[i * n:(i + 1) * n] for i in range(n)])
                if X != Matrix.scalar(n, X[0, 0]) and all(X @ M == M @ X for M in mats):
                    return X
    return None


def is_irreducible(mats: Sequence[Matrix], seed: int = 0) -> bool:
    """Exact test for a common invariant subspace over the complex numbers."""
    mats = list(mats)
    n = mats[0].nrows
    if n == 1:
        return True
    if not all(M.is_exact() for M in mats):
        raise TypeError("irreducibility is decided exactly; pass rational matrices")
    # rank mod p never exceeds the rank over Q, so a full span mod p is a proof
    for p, g in _good_primes(mats, 1):
        if len(modp.algebra_basis(g, p)) == n * n:
            return True
    if reducibility_witness(mats, seed) is not None:
        return False
    return _algebra_dim_exact(mats) == n * n


def system_matrices(E: PartialFractionSystem) -> list[Matrix]:
    return [*E.B, E.B_inf]


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------

def _report(check: str, name: str, ok: bool, expected, computed, **extra) -> dict:
    out = {"check": check, "system-id": name, "status": "pass" if ok else "fail",
           "details": {"expected": expected, "computed": computed}}
    out["details"].update(extra)
    return out


def mc0_isomorphism_witness(E: PartialFractionSystem) -> dict:
    if not check_condition_star_star(E):
        raise ConditionViolation("the second non-degeneracy condition fails")
    conv = q_convolution(E, 1)
    Phi = Matrix.blocks([E.residues()])
    K, L = K_space(E), L_space(E, 1, conv.F_hat)
    H = subspace_sum(K, L)
    surj = rank(Phi) == E.m
    ker_ok = kernel(Phi) == H
    inter = [Phi @ Fj == Bj @ Phi for Fj, Bj in zip(conv.F, E.B)]
    inter_inf = Phi @ conv.F_inf == E.B_inf @ Phi
    ok = surj and ker_ok and all(inter) and inter_inf
    return _report(
        "mc0-isomorphism", E.name, ok,
        {"surjective": True, "kernel_is_K_plus_L": True, "intertwines": True},
        {"surjective": surj, "kernel_is_K_plus_L": ker_ok,
         "intertwines": all(inter) and inter_inf, "dim": E.m},
    )


def _all_residues(S: PartialFractionSystem) -> list[Matrix]:
    return S.residues()


def psi_composition_check(E: PartialFractionSystem, mu1, mu2) -> dict:
    mu1, mu2 = _as_mu(mu1, E), _as_mu(mu2, E)
    mu12 = mu1 + mu2 - 1
    if mu12 == 0:
        raise ValueError("composed multiplier mu1 + mu2 - 1 vanishes")
    Ft = Psi(E, mu1)              # size (N+1)m
    Hs = Psi(Ft, mu2)             # size (N+1)^2 m
    Fp = Psi(E, mu12)             # size (N+1)m
    phi = Matrix.blocks([_all_residues(Ft)])
    H_res, Fp_res = _all_residues(Hs), _all_residues(Fp)
    rel = [phi @ Hi == Fi @ phi for Hi, Fi in zip(H_res, Fp_res)]
    rel_inf = phi @ Hs.B_inf == Fp.B_inf @ phi
    # quotient dimensions of the nested and direct constructions
    try:
        inner = Psi_bar(E, mu1).system
        d_nested = Psi_bar(inner, mu2).system.m
    except CollapseError:
        d_nested = 0
    try:
        d_direct = Psi_bar(E, mu12).system.m
    except CollapseError:
        d_direct = 0
    ok = all(rel) and rel_inf and d_nested == d_direct
    return _report(
        "psi-composition", E.name, ok,
        {"intertwines": True, "dim": d_direct},
        {"intertwines": all(rel) and rel_inf, "dim": d_nested,
         "relations": [bool(r) for r in rel] + [bool(rel_inf)]},
        composed_multiplier=str(mu12),
    )


def restrict_system(E: PartialFractionSystem, W: Subspace) -> PartialFractionSystem:
    """The subsystem on a B-invariant subspace, in the coordinates of W's basis."""
    def restrict(M):
        if not is_invariant(M, W):
            raise ValueError("subspace is not invariant")
        cols = [[(M @ v)[p] for p in W.pivots] for v in W.vectors]
        return Matrix.from_columns(cols, W.dim)
    return PartialFractionSystem(W.dim, E.q, E.poles, tuple(restrict(M) for M in E.B),
                                 restrict(E.B_inf), E.name + "-sub")


def submodule_check(E: PartialFractionSystem, W: Subspace, mu) -> dict:
    """W^(N+1) meets K+L exactly in K_W + L_W, so mc(W) sits inside mc(V)."""
    mu = _as_mu(mu, E)
    n = E.N + 1
    EW = restrict_system(E, W)
    # embed W-coordinates back blockwise
    basis = W.basis

    def embed(sub: Subspace) -> Subspace:
        vecs = []
        for v in sub.vectors:
            out = []
            for b in range(n):
                out.extend(basis @ v[b * W.dim:(b + 1) * W.dim])
            vecs.append(out)
        return Subspace(n * E.m, vecs)

    Wn = Subspace(n * E.m, [_embed_block(w, b, n) for b in range(n) for w in W.vectors])
    conv = q_convolution(E, mu)
    ok_inv = all(is_invariant(M, Wn) for M in (*conv.F, conv.F_inf))
    H = subspace_sum(K_space(E), L_space(E, mu, conv.F_hat))
    HW = subspace_sum(K_space(EW), L_space(EW, mu))
    lhs = subspace_intersection(Wn, H)
    rhs = embed(HW)
    dim_W = n * W.dim - HW.dim
    dim_V = n * E.m - H.dim
    ok = ok_inv and lhs == rhs and dim_W <= dim_V
    return _report("submodule", E.name, ok,
                   {"intersection": rhs.dim, "dim_le": True},
                   {"intersection": lhs.dim, "dims": [dim_W, dim_V], "invariant": ok_inv})


# ---------------------------------------------------------------------------
# intersection table for the convolved system
# ---------------------------------------------------------------------------

def convolved_polynomial(conv: ConvolutionResult) -> PolyMat:
    """G(x) = T(x) F(x) of the convolved system, without content stripping."""
    return canonical_from_partial_fraction(conv.system).polymat()


def _chain_count(A, b) -> int:
    """dim of {v in ker A(b) : A'(b) v in im A(b)}, i.e. elementary divisors of order >= 2 at b."""
    Ab = A.evaluate(b)
    kerA = kernel(Ab)
    pre = preimage(A.derivative().evaluate(b), Subspace.span_columns(Ab))
    return subspace_intersection(pre, kerA).dim


def kl_intersection_report(E: PartialFractionSystem, mu, extra_points: Sequence = (),
                           table: str = "stated") -> dict:
    """Intersections of K and L with the kernels of G_0, G_inf and G(a).

    ``table="stated"`` uses dim ker B_j for the derivative row at a = mu b_j off the poles;
    ``table="derived"`` uses the number of Jordan chains of length >= 2 of A at b_j there,
    which is what the preimage condition reduces to.
    """
    from .algebra import rational_roots

    if table not in ("stated", "derived"):
        raise ValueError("table must be 'stated' or 'derived'")

    mu = _as_mu(mu, E)
    if mu == 1:
        raise ValueError("the intersection table assumes mu != 1")
    if not E.is_exact():
        raise TypeError("intersection table is checked exactly")
    conv = q_convolution(E, mu)
    n = (E.N + 1) * E.m
    K = K_space(E)
    L = L_space(E, mu, conv.F_hat)
    F = conv.system
    G0 = Matrix.identity(n) - F.B0
    Ginf = F.B_inf.scale(E.b_inf)
    Gx = convolved_polynomial(conv)
    dGx = Gx.derivative()
    binf = E.b_inf
    kB0 = kernel(E.B0).dim
    kB = [kernel(Bi).dim for Bi in E.B]
    A_inf = E.B_inf.scale(binf)
    kL = kernel(A_inf.add_scalar(-mu * binf)).dim
    poles = list(E.poles)
    A = canonical_from_partial_fraction(E).polymat()
    zeros = [r for r, _ in rational_roots(A.det())[0]]

    rows = []

    def add(kind, point, computed, expected):
        rows.append({"kind": kind, "point": str(point), "computed": computed,
                     "expected": expected, "ok": computed == expected})

    def dim_cap(M, S):
        return subspace_intersection(kernel(M), S).dim

    thetas = sorted({Fraction(1), mu, mu + 1, *extra_points}, key=str)
    for th in thetas:
        if th == 0:
            continue
        M = G0.add_scalar(-th).scale(-1)
        add("G0&K", th, dim_cap(M, K), kB0 if th == 1 else (sum(kB) if th == mu else 0))
        add("G0&L", th, dim_cap(M, L), kL if th == mu else 0)
    kappas = sorted({binf, mu * binf, 2 * binf, *extra_points}, key=str)
    for ka in kappas:
        if ka == 0:
            continue
        M = Ginf.add_scalar(-ka).scale(-1)
        add("Ginf&K", ka, dim_cap(M, K), kB0 + sum(kB) if ka == binf else 0)
        add("Ginf&L", ka, dim_cap(M, L), kL if ka == mu * binf else 0)
    points = set(poles) | {mu * b for b in poles} | {mu * a for a in zeros} | set(extra_points)
    points.add(Fraction(7, 3) * (1 + abs(max(poles, key=abs))))
    for a in sorted(points, key=str):
        if a == 0:
            continue
        Ga = Gx.evaluate(a)
        kerGa = kernel(Ga)
        if a in poles:
            j = poles.index(a)
            expK = kB0 + sum(kB) - kB[j]
        else:
            j = next((k for k, b in enumerate(poles) if mu * b == a), None)
            expK = kB[j] if j is not None else 0
        add("G(a)&K", a, subspace_intersection(kerGa, K).dim, expK)
        add("G(a)&L", a, subspace_intersection(kerGa, L).dim, kL if a in poles else 0)
        # derivative preimage of the image, intersected with ker G(a) and K
        img = Subspace.span_columns(Ga)
        pre = preimage(dGx.evaluate(a), img)
        val = subspace_intersection(subspace_intersection(pre, kerGa), K).dim
        jj = next((k for k, b in enumerate(poles) if mu * b == a), None)
        if jj is None:
            exp_d = 0
        elif table == "derived" and a not in poles:
            exp_d = _chain_count(A, poles[jj])
        else:
            exp_d = kB[jj]
        add("dG(a)&K", a, val, exp_d)
    ok = all(r["ok"] for r in rows)
    check = "kl-intersections" if table == "stated" else "kl-intersections-derived"
    return _report(check, E.name, ok,
                   [r["expected"] for r in rows], [r["computed"] for r in rows], rows=rows)

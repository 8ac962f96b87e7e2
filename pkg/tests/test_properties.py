from fractions import Fraction as F
from functools import reduce

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmidconv.algebra import (
    Poly, conjugate_partition, coprime_basis, normalize_partition, poly_gcd, squarefree_decomposition,
)
from qmidconv.linalg import (
    Matrix, PolyMat, Subspace, det, image, induced_operator, kernel, quotient, rank, smith_normal_form,
    subspace_intersection, subspace_sum,
)
from qmidconv.system import (
    PartialFractionSystem, canonical_from_partial_fraction, partial_fraction_from_polynomial,
)

fractions = st.builds(F, st.integers(-4, 4), st.integers(1, 3))
nonzero = fractions.filter(lambda v: v != 0)
polys = st.lists(st.integers(-3, 3), min_size=1, max_size=4).map(Poly).filter(lambda p: not p.is_zero())
roots = st.lists(st.integers(-3, 3), min_size=1, max_size=5)


def matrices(n, k=None):
    return st.lists(st.lists(fractions, min_size=k or n, max_size=k or n), min_size=n, max_size=n).map(Matrix)


@given(polys, polys)
def test_gcd_divides(p, q):
    g = poly_gcd(p, q)
    assert g.divides(p) and g.divides(q)
    assert g.lc == 1


@given(roots, st.integers(1, 3))
def test_squarefree_reconstructs(rs, c):
    p = Poly.from_roots(rs) * Poly.const(c)
    parts = squarefree_decomposition(p)
    prod = reduce(lambda a, b: a * b, (f ** e for f, e in parts), Poly.const(1))
    assert prod == p.monic()
    for f, _ in parts:
        assert poly_gcd(f, f.derivative()).is_constant()


@given(st.lists(roots, min_size=1, max_size=3))
def test_coprime_basis(root_lists):
    ps = [Poly.from_roots(r) for r in root_lists]
    basis = coprime_basis(ps)
    for i, a in enumerate(basis):
        for b in basis[i + 1:]:
            assert poly_gcd(a, b).is_constant()
    for p in ps:
        rest = p
        for f in basis:
            while f.divides(rest):
                rest = rest.exact_div(f)
        assert rest.is_constant()


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, 4)))
       .flatmap(lambda nk: matrices(*nk)))
def test_rank_nullity(M):
    assert rank(M) + kernel(M).dim == M.ncols
    assert image(M).dim == rank(M)


@given(matrices(4, 2), matrices(4, 2))
def test_grassmann(A, B):
    S, T = image(A), image(B)
    assert subspace_sum(S, T).dim + subspace_intersection(S, T).dim == S.dim + T.dim


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(roots, min_size=2, max_size=2), min_size=2, max_size=2))
def test_smith_chain_and_det(entries):
    M = PolyMat([[Poly.from_roots(r) for r in row] for row in entries])
    d, r = smith_normal_form(M)
    for a, b in zip(d, d[1:]):
        assert b.divides(a)
    D = M.det()
    if D.is_zero():
        assert r < 2
    else:
        assert r == 2
        prod = reduce(lambda a, b: a * b, d, Poly.const(1))
        assert prod == D.monic()


@given(st.integers(1, 3), matrices(3), matrices(3))
def test_induced_operator_commutes(k, X, Y):
    # block upper operators preserve span(e_1..e_k)
    def upper(M):
        return Matrix([[0 if (i >= k and j < k) else M[i, j] for j in range(3)] for i in range(3)])
    F1, F2 = upper(X), upper(Y)
    W = Subspace(3, [[int(i == j) for i in range(3)] for j in range(k)])
    Q = quotient(3, W)
    if Q.dim == 0:
        return
    assert induced_operator(F1 @ F2, Q) == induced_operator(F1, Q) @ induced_operator(F2, Q)
    proj_ok = Q.projection @ F1 == induced_operator(F1, Q) @ Q.projection
    assert proj_ok


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2).flatmap(lambda m: st.tuples(
    st.just(m),
    st.lists(st.sampled_from([F(1), F(2), F(-1), F(1, 2), F(3)]), min_size=1, max_size=3, unique=True),
    st.lists(matrices(m), min_size=3, max_size=3),
    matrices(m))))
def test_partial_fraction_round_trip(data):
    m, poles, Bs, B_inf = data
    E = PartialFractionSystem(m, F(1, 2), tuple(poles), tuple(Bs[:len(poles)]), B_inf)
    assume(det(B_inf) != 0 and det(Matrix.identity(m) - E.B0) != 0)
    A = canonical_from_partial_fraction(E)
    assume(A.N == len(poles) and A.polymat().entry_gcd().degree == 0)
    back = partial_fraction_from_polynomial(A, poles)
    assert back.B == E.B and back.B_inf == E.B_inf


@given(st.lists(st.integers(1, 5), min_size=0, max_size=6))
def test_conjugate_partition_involution(parts):
    t = normalize_partition(parts)
    assert conjugate_partition(conjugate_partition(t)) == t
    assert sum(conjugate_partition(t)) == sum(t)


@given(matrices(3))
def test_det_matches_rank(M):
    assert (det(M) == 0) == (rank(M) < 3)

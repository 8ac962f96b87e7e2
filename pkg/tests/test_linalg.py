from fractions import Fraction as F

import pytest

from qmidconv.algebra import Poly
from qmidconv.errors import DimensionMismatch, InvarianceViolation
from qmidconv.linalg import (
    Matrix, PolyMat, Subspace, centralizer_dimension, generalized_kernel_dims, induced_operator,
    kernel, largest_invariant_subspace_inside, quotient, rank, smith_normal_form,
    subspace_intersection, subspace_sum,
)

x = Poly.x()
E1, E2 = (1, 0), (0, 1)


def test_kernel_examples():
    assert kernel(Matrix.zeros(2)).dim == 2
    assert kernel(Matrix.identity(3)).dim == 0
    K = kernel(Matrix([[F(-1, 2), F(1, 2)], [F(1, 4), F(-1, 4)]]))
    assert K.vectors == ((1, 1),)


def test_numeric_kernel_uses_threshold():
    M = Matrix([[1.0, 1.0], [1.0, 1.0 + 1e-13]]).to_complex()
    assert kernel(M).dim == 1
    assert kernel(M, tol=1e-15).dim == 0


def test_sum_and_intersection_examples():
    S, T = Subspace(2, [E1]), Subspace(2, [E2])
    assert subspace_sum(S, T).dim == 2
    assert subspace_intersection(S, Subspace.full(2)).vectors == S.vectors
    assert subspace_intersection(Subspace(2, [(1, 1)]), Subspace(2, [(1, -1)])).dim == 0
    with pytest.raises(DimensionMismatch):
        subspace_sum(S, Subspace(3, [(1, 0, 0)]))


def test_quotient_examples():
    Q0 = quotient(2, Subspace.zero(2))
    assert Q0.dim == 2 and Q0.section == Matrix.identity(2) and Q0.projection == Matrix.identity(2)
    Q = quotient(2, Subspace(2, [(1, 1)]))
    assert Q.dim == 1
    assert Q.section.column(0) == (0, 1)
    assert quotient(3, Subspace.full(3)).dim == 0
    assert Q.projection @ Q.section == Matrix.identity(1)


def test_induced_operator_examples():
    Fm = Matrix([[1, 2], [3, 4]])
    assert induced_operator(Fm, quotient(2, Subspace.zero(2))) == Fm
    Q = quotient(2, Subspace(2, [(1, 1)]))
    assert induced_operator(Matrix.identity(2), Q) == Matrix.identity(1)
    Lmat = Matrix([[F(-1, 2), F(1, 2)], [F(1, 4), F(-1, 4)]])
    ind = induced_operator(Lmat, Q)
    assert ind.shape == (1, 1)
    assert Q.projection @ Lmat == ind @ Q.projection
    with pytest.raises(InvarianceViolation):
        induced_operator(Matrix([[1, 1], [0, 2]]), quotient(2, Subspace(2, [E2])))


def test_smith_examples(heine):
    d, r = smith_normal_form(PolyMat([[x - 1, 0], [0, (x - 1) * (x - 2)]]))
    assert (d, r) == ([(x - 1) * (x - 2), x - 1], 2)
    d, r = smith_normal_form(heine.polymat())
    assert d == [(x - 1) * (x - F(5, 3)), Poly.const(1)]
    d, r = smith_normal_form(PolyMat.from_coefficients([Matrix.identity(3)]))
    assert d == [Poly.const(1)] * 3


def test_largest_invariant_subspace_examples():
    M = Matrix([[1, 1], [0, 1]])
    assert largest_invariant_subspace_inside(M, Subspace.full(2)).dim == 2
    assert largest_invariant_subspace_inside(M, Subspace.zero(2)).dim == 0
    assert largest_invariant_subspace_inside(M, Subspace(2, [E2])).dim == 0


def test_generalized_kernel_examples():
    t = F(3, 7)
    assert generalized_kernel_dims(Matrix.jordan_block(t, 2), t, 2) == [1, 2]
    assert generalized_kernel_dims(Matrix.diag([t, t]), t, 2) == [2, 2]
    M = Matrix([[F(3, 4), F(-1, 2)], [0, F(1, 8)]])
    assert generalized_kernel_dims(M, F(3, 4), 2) == [1, 1]


def test_centralizer_examples():
    assert centralizer_dimension(Matrix.identity(3)) == 9
    assert centralizer_dimension(Matrix.diag([1, 2])) == 2
    t = F(2)
    J = Matrix.direct_sum(Matrix.jordan_block(t, 2), Matrix.jordan_block(t, 1))
    assert centralizer_dimension(J) == 5


def test_rank_nullity_small():
    M = Matrix([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert rank(M) + kernel(M).dim == 3


def test_pickle_round_trip():
    import pickle

    from qmidconv.linalg import PolyMat, Subspace

    M = Matrix([[F(1, 2), 3], [0, F(-1, 3)]])
    S = Subspace(2, [[1, 2]])
    P = PolyMat([[Poly([1, 2]), Poly([F(1, 3)])], [Poly(), Poly.x()]])
    for obj in (M, S, P, Poly([0, F(5, 7)]), Matrix.zeros(0, 3)):
        back = pickle.loads(pickle.dumps(obj))
        assert back == obj
    assert pickle.loads(pickle.dumps(S)).pivots == S.pivots

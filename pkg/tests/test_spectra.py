from fractions import Fraction as F

import pytest

from qmidconv.algebra import Poly
from qmidconv.convolution import q_convolution
from qmidconv.errors import NonFuchsianError
from qmidconv.linalg import Matrix, PolyMat, centralizer_dimension
from qmidconv.spectra import (
    EigenGroup, adjugate_system_check, divisor_spectral_type, divisor_spectral_type_via_companion,
    endpoint_centralizer_sum, idx_from_spectral_type, jordan_normal_form_key, jordan_spectral_type,
    numeric_jordan_spectral_type, parse_spectral_type, predict_conv_endpoint_jordan,
    predict_conv_spectral_type, rigidity_index, spectral_type,
)
from qmidconv.system import PolynomialSystem, canonical_from_partial_fraction

x = Poly.x()


def _roots(groups):
    return sorted((g.label(0) * -1, g.t) for g in groups)


def test_jordan_examples(heine):
    g = jordan_spectral_type(Matrix([[F(3, 4), F(-1, 2)], [0, F(1, 8)]]))
    assert _roots(g) == [(F(1, 8), (1,)), (F(3, 4), (1,))]
    t = F(5, 3)
    J = Matrix.direct_sum(Matrix.jordan_block(t, 2), Matrix.jordan_block(t, 1))
    (grp,) = jordan_spectral_type(J)
    assert grp.t == (2, 1) and grp.m == (2, 1)
    assert _roots(jordan_spectral_type(heine.A0)) == [(-10, (1,)), (-1, (1,))]


def test_irrational_eigenvalues_stay_grouped():
    (grp,) = jordan_spectral_type(Matrix([[0, 2], [1, 0]]))
    assert grp.label == x * x - 2 and grp.degree == 2 and grp.m == (1,)


def test_divisor_examples(heine):
    assert {str(g.label): g.n for g in divisor_spectral_type(heine.polymat())} == {
        "x - 1": (1,), "x - 5/3": (1,)}
    a, b, c, d = (x - 2, x - 3, x - 5, x - 7)
    D = [a * b * b * c * d, a * b, a * b, a, Poly.const(1)]
    M = PolyMat([[D[i] if i == j else 0 for j in range(5)] for i in range(5)])
    got = {str(g.label): g.n for g in divisor_spectral_type(M)}
    assert got == {"x - 2": (4,), "x - 3": (3, 1), "x - 5": (1,), "x - 7": (1,)}
    assert divisor_spectral_type(PolyMat.from_coefficients([Matrix.identity(3)])) == []


def test_companion_oracle(heine, estar, e3):
    key = lambda gs: sorted((str(g.label), g.n) for g in gs)  # noqa: E731
    assert key(divisor_spectral_type_via_companion(heine.polymat())) == key(divisor_spectral_type(heine.polymat()))
    A = canonical_from_partial_fraction(estar)
    assert key(divisor_spectral_type_via_companion(A.polymat())) == [("x - 6", (1,))]
    assert key(divisor_spectral_type_via_companion(e3.polymat())) == [("x - 1/7", (1,)), ("x - 40/21", (1,))]


def test_spectral_type_examples(estar, heine, e3):
    A = canonical_from_partial_fraction(estar)
    assert spectral_type(A).render() == "1;1;1"
    assert spectral_type(heine).render() == "1,1;1,1;1,1"
    assert spectral_type(e3).render() == "1,1;1,1;1,1"


def test_rigidity_index_examples(estar, heine, e3):
    assert rigidity_index(heine) == 2
    assert rigidity_index(e3) == 2
    assert rigidity_index(canonical_from_partial_fraction(estar)) == 2
    with pytest.raises(NonFuchsianError):
        rigidity_index(PolynomialSystem(2, F(1, 2), (Matrix([[1, 0], [0, 0]]), Matrix.identity(2))))


def test_idx_from_text():
    assert idx_from_spectral_type(parse_spectral_type("3-1,1;3,1,1;4,3-1,1,1", m=5, N=2)) == 0
    assert idx_from_spectral_type(parse_spectral_type("1,1;1,1;1,1")) == 2
    assert idx_from_spectral_type(parse_spectral_type("1;1;1")) == 2
    with pytest.raises(ValueError):
        idx_from_spectral_type(parse_spectral_type("2;1;1", m=1, N=1))


def test_render_parse_round_trip():
    for text in ("3-1,1;3,1,1;4,3-1,1,1", "1,1;1,1;1,1", "12;12;12,6,6"):
        assert parse_spectral_type(text).render() == text


def test_centralizer_cross_check(heine):
    for M in (heine.A0, heine.A_inf, Matrix.direct_sum(Matrix.jordan_block(2, 2), Matrix.jordan_block(2, 1))):
        assert endpoint_centralizer_sum(jordan_spectral_type(M)) == centralizer_dimension(M)


def test_adjugate(heine, e3, estar):
    for A in (heine, e3, canonical_from_partial_fraction(estar)):
        assert adjugate_system_check(A)["status"] == "pass"


def test_conv_prediction_for_estar(estar):
    mu = F(1, 8)
    S = spectral_type(canonical_from_partial_fraction(estar))
    pred = predict_conv_spectral_type(S, mu, estar.b_inf, estar.poles)
    assert pred.render() == "1,1;1,1;1,1"
    got = spectral_type(canonical_from_partial_fraction(q_convolution(estar, mu).system))
    assert pred.normal_form() == got.normal_form()


def test_endpoint_prediction_for_estar(estar):
    mu = F(1, 8)
    S = spectral_type(canonical_from_partial_fraction(estar))
    p0, pinf = predict_conv_endpoint_jordan(S, mu, estar.b_inf)
    assert sorted(g.label(0) * -1 for g in p0) == [F(1, 8), F(3, 4)]
    assert sorted(g.label(0) * -1 for g in pinf) == [F(-1, 2), F(-1, 8)]
    c = q_convolution(estar, mu)
    G0 = Matrix.identity(2) - c.system.B0
    assert G0 == Matrix([[F(3, 4), F(-1, 2)], [0, F(1, 8)]])
    Ginf = c.F_inf.scale(estar.b_inf)
    assert Ginf == Matrix([[F(-3, 8), F(1, 4)], [F(1, 8), F(-1, 4)]])
    assert jordan_normal_form_key(p0) == jordan_normal_form_key(jordan_spectral_type(G0))
    assert jordan_normal_form_key(pinf) == jordan_normal_form_key(jordan_spectral_type(Ginf))


def test_endpoint_merge_grows_blocks():
    # mu equal to an eigenvalue of A_0: that group's blocks each grow by one
    S = parse_spectral_type("1,1;1,1;1,1")
    S = type(S)(2, 1, [EigenGroup(x - 3, (1,)), EigenGroup(x - 5, (1,))], S.Sinf, S.Sdiv)
    p0, _ = predict_conv_endpoint_jordan(S, F(3), F(-1))
    grp = next(g for g in p0 if g.label == x - 3)
    assert grp.t == (2, 1)


def test_numeric_defective_eigenvalue_is_one_group():
    J = Matrix.direct_sum(Matrix.jordan_block(F(3, 2), 2), Matrix([[F(-1)]]))
    P = Matrix([[1, 2, 0], [0, 1, 3], [1, 0, 1]])
    from qmidconv.linalg import inverse
    M = (P @ J @ inverse(P)).to_complex()
    groups = numeric_jordan_spectral_type(M)
    assert sorted(g.t for g in groups) == [(1,), (2,)]

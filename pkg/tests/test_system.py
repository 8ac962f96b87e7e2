import json
from fractions import Fraction as F

import pytest

from qmidconv.algebra import Poly
from qmidconv.errors import DistinctPoleViolation, FormatError
from qmidconv.linalg import Matrix, PolyMat, kernel, rank
from qmidconv.spectra import divisor_spectral_type, idx_from_spectral_type, jordan_spectral_type, spectral_type
from qmidconv.system import (
    GaugeMove, PartialFractionSystem, PolynomialSystem, apply_gauge, b0_of, canonical_from_partial_fraction,
    canonicalize, catalog_E1_spectral_data, catalog_generalized_qhg, catalog_qhg_f, fuchsian_check, partial_fraction_from_polynomial,
    read_system, suggest_poles, system_from_dict, write_system,
)

x = Poly.x()
I2 = Matrix.identity(2)


def _pf(m, poles, B, B_inf):
    return PartialFractionSystem(m, F(1, 2), tuple(poles), tuple(B), B_inf)


def test_b0_examples(estar):
    assert b0_of(estar) == Matrix([[F(1, 4)]])
    assert b0_of(_pf(2, [1], [Matrix.zeros(2)], Matrix.zeros(2))) == I2
    half = Matrix.scalar(2, F(1, 2))
    assert b0_of(_pf(2, [1], [half], half)) == Matrix.zeros(2)


def test_canonical_from_partial_fraction_examples(estar):
    A = canonical_from_partial_fraction(estar)
    assert A.A == (Matrix([[F(3, 4)]]), Matrix([[F(-1, 8)]]))
    assert estar.b_inf == F(-1, 2)
    E = _pf(2, [1], [Matrix.zeros(2)], I2)
    assert canonical_from_partial_fraction(E).A == (I2, -I2)


def test_round_trips(estar, heine):
    A = canonical_from_partial_fraction(estar)
    assert partial_fraction_from_polynomial(A, [2]) == estar
    poles = suggest_poles(heine)
    back = canonical_from_partial_fraction(partial_fraction_from_polynomial(heine, poles))
    assert back.A == heine.A
    E = partial_fraction_from_polynomial(PolynomialSystem(2, F(1, 2), (I2, -I2)), [1])
    assert E.B == (Matrix.zeros(2),) and E.B_inf == I2


def test_rank_law_at_zeros_of_det(heine):
    E = partial_fraction_from_polynomial(heine, [1])
    assert rank(E.B[0]) == 2 - kernel(heine.evaluate(1)).dim == 1
    E = partial_fraction_from_polynomial(heine, [7])
    assert rank(E.B[0]) == 2


def test_conversion_rejects_bad_poles(heine):
    with pytest.raises(DistinctPoleViolation):
        partial_fraction_from_polynomial(heine, [0])
    with pytest.raises(DistinctPoleViolation):
        _pf(1, [2, 2], [Matrix([[1]])] * 2, Matrix([[1]]))


def test_canonicalize_examples(heine):
    assert canonicalize(PolyMat([[x, 0], [0, x]])).A == (I2,)
    M = Matrix([[1, 2], [3, 5]])
    assert canonicalize(PolyMat([[(x - 1) * e for e in r] for r in M.rows])).A == (M,)
    num = heine.polymat()
    assert canonicalize(num, Poly((F(-10), F(6)))).A == heine.A


def test_heine_catalog(heine):
    assert heine.A[0] == Matrix([[-10, 10], [0, -1]])
    assert heine.A[1] == Matrix([[6, -6], [2, -1]])
    assert {str(g.label) for g in jordan_spectral_type(heine.A0)} == {"x + 10", "x + 1"}
    assert {str(g.label) for g in jordan_spectral_type(heine.A_inf)} == {"x - 2", "x - 3"}
    assert heine.polymat().det() == (Poly((-10, 6))) * (x - 1)
    S = spectral_type(heine)
    assert S.render() == "1,1;1,1;1,1" and idx_from_spectral_type(S) == 2


def test_qhg_catalog(e3):
    f = catalog_qhg_f([2, 3], [4, 5], 7, F(1, 2))
    assert f == [Poly((80, -42)), Poly((-18, 35)), Poly((1, -7))]
    assert e3.A0 == Matrix([[0, 80], [-1, 18]])
    # the A_inf entry (2,2) is -(x-coefficient of f1) = -35
    assert e3.A_inf == Matrix([[0, -42], [7, -35]])
    with pytest.raises(ValueError):
        catalog_generalized_qhg([1], [1, 2], 1, F(1, 2))


def test_e1_data():
    S = catalog_E1_spectral_data()
    assert idx_from_spectral_type(S) == 0
    assert S.part_sums() == (5, 5, 10)
    assert S.render() == "3-1,1;3,1,1;4,3-1,1,1"


def test_gauges(heine):
    P = Matrix([[1, 1], [0, 1]])
    assert apply_gauge(heine, GaugeMove("similarity", I2)).A == heine.A
    sim = apply_gauge(heine, GaugeMove("similarity", P))
    assert spectral_type(sim).normal_form() == spectral_type(heine).normal_form()
    c = apply_gauge(heine, GaugeMove("constant", F(3)))
    assert {str(g.label) for g in jordan_spectral_type(c.A0)} == {"x + 30", "x + 3"}
    assert spectral_type(c).render() == spectral_type(heine).render()
    lin = apply_gauge(heine, GaugeMove("linear", F(1, 4)))
    assert lin.N == heine.N + 1
    groups = {str(g.label): g.n for g in divisor_spectral_type(lin.polymat())}
    assert groups["x - 4"] == (2,)
    assert apply_gauge(heine, GaugeMove("times_x")).A == heine.A
    with pytest.raises(ValueError):
        GaugeMove("constant", 0)
    with pytest.raises(ValueError):
        GaugeMove("similarity", Matrix([[1, 1], [1, 1]]))


def test_fuchsian_examples(estar):
    assert fuchsian_check(canonical_from_partial_fraction(estar))
    with pytest.raises(FormatError):
        PolynomialSystem(2, F(1, 2), (Matrix.zeros(2), I2))
    singular = PolynomialSystem(2, F(1, 2), (Matrix([[1, 0], [0, 0]]), I2))
    assert not fuchsian_check(singular)


def test_file_round_trip(tmp_path, estar, heine):
    for E in (estar, heine):
        p = tmp_path / "sys.json"
        write_system(E, p)
        text = p.read_text()
        assert read_system(p) == E
        write_system(read_system(p), p)
        assert p.read_text() == text


def test_file_errors(tmp_path):
    base = {"format": "qmc-system-v1", "kind": "partial-fraction", "scalars": "rational", "m": 1,
            "q": "1/2", "poles": ["2", "2"], "B": [[["1"]], [["1"]]], "B_inf": [["1"]]}
    with pytest.raises(DistinctPoleViolation):
        system_from_dict(base)
    with pytest.raises(FormatError):
        system_from_dict({"format": "qmc-system-v1", "kind": "polynomial", "scalars": "rational",
                          "m": 1, "q": "1/2"})
    with pytest.raises(FormatError):
        system_from_dict(dict(base, poles=["2"], B=[[["1"]]], extra=1))
    with pytest.raises(FormatError):
        system_from_dict(dict(base, poles=["2"], B=[[["0.5"]]]))
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        read_system(p)


def test_complex_file_round_trip(tmp_path, estar):
    E = estar.to_complex()
    p = tmp_path / "c.json"
    write_system(E, p)
    d = json.loads(p.read_text())
    assert d["scalars"] == "complex-f64" and d["poles"] == [[2.0, 0.0]]
    assert read_system(p) == E

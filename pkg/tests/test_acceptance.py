"""End-to-end acceptance checks; each test prints one pass/fail line."""

import time
from fractions import Fraction as F

import pytest

from qmidconv.algebra import Poly, format_scalar, multiplicity, rational_roots
from qmidconv.convolution import dimension_formula, middle_convolution
from qmidconv.linalg import charpoly
from qmidconv.qnumeric import QContext, euler_transform_check, kernel_P, qpochhammer_inf, theta
from qmidconv.spectra import idx_from_spectral_type, rigidity_index, spectral_type
from qmidconv.system import canonical_from_partial_fraction, catalog_E1_spectral_data
from qmidconv.verify import oracle_check_polynomial, parity_check_polynomial, run_corpus, summarize

x = Poly.x()


def verdict(capsys, label, ok, detail=""):
    with capsys.disabled():
        print(f"\n[acceptance] {label}: {'PASS' if ok else 'FAIL'}{'  ' + detail if detail else ''}")
    assert ok, detail


def failures(reports, names=None):
    return [r for r in reports if r["status"] != "pass" and (names is None or r["check"] in names)]


def eigenvalues(M):
    found, rest = rational_roots(charpoly(M))
    assert rest == 0
    return sorted(r for r, _ in found)


def scalar_between(values, targets):
    """The c with c * targets == values as sets, or None."""
    c = sum(values) / sum(targets)
    return c if sorted(c * t for t in targets) == sorted(values) else None


QHG = dict(q=F(1, 2), a=(F(2), F(3)), b=(F(4), F(5)), lam=F(7))


@pytest.fixture(scope="module")
def predictions(corpus):
    return run_corpus(corpus, ("predictions",))


def test_c01_heine(capsys, heine):
    t = time.perf_counter()
    S = spectral_type(heine)
    idx = rigidity_index(heine)
    dt = time.perf_counter() - t
    ok = S.render() == "1,1;1,1;1,1" and idx == 2 and dt < 1
    verdict(capsys, "1 Heine spectral type and index", ok, f"type={S.render()} idx={idx} {dt:.2f}s")


def test_c02_generalized_qhg_literal(capsys, e3):
    # the literal pair {8,10}, {14,21} scaled by one constant from {q/b_k}, {1/a_k}
    ev0, evinf = eigenvalues(e3.A0), eigenvalues(e3.A_inf)
    q, a, b = QHG["q"], QHG["a"], QHG["b"]
    c = scalar_between(ev0, [q / bk for bk in b])
    ok = (ev0 == [8, 10] and evinf == [14, 21] and c is not None
          and sorted(c / ak for ak in a) == evinf)
    verdict(capsys, "2 generalized q-hypergeometric endpoint eigenvalues, literal values", ok,
            f"Ev(A0)={list(map(str, ev0))} Ev(Ainf)={list(map(str, evinf))}")


def test_c02_generalized_qhg_construction(capsys, e3):
    ev0, evinf = eigenvalues(e3.A0), eigenvalues(e3.A_inf)
    q, a, b, lam = QHG["q"], QHG["a"], QHG["b"], QHG["lam"]
    c0 = scalar_between(ev0, [q / bk for bk in b])
    cinf = scalar_between(evinf, [1 / ak for ak in a])
    det = e3.polymat().det()
    z2 = (1 / lam) * (b[0] / (q * a[0])) * (b[1] / (q * a[1]))
    zeros_ok = multiplicity(det, x - 1 / lam) == 1 and multiplicity(det, x - z2) == e3.m - 1
    idx = rigidity_index(e3)
    ok = (idx == 2 and ev0 == [8, 10] and evinf == [-21, -14] and c0 is not None and cinf is not None
          and z2 == F(40, 21) and zeros_ok)
    verdict(capsys, "2 generalized q-hypergeometric index, eigenvalues per endpoint scalar, det zeros", ok,
            f"idx={idx} Ev(A0)={list(map(str, ev0))} Ev(Ainf)={list(map(str, evinf))} "
            f"scalars=({c0},{cinf})")


def test_c03_index_zero_type(capsys):
    S = catalog_E1_spectral_data()
    idx = idx_from_spectral_type(S)
    verdict(capsys, "3 spectral type 3-1,1;3,1,1;4,3-1,1,1 has index 0", idx == 0 and S.m == 5, f"idx={idx}")


def test_c04_rank_one_example(capsys, estar):
    A = canonical_from_partial_fraction(estar)
    poly_ok = A.polymat().rows[0][0] == Poly([F(3, 4), F(-1, 8)])
    idx = rigidity_index(A)
    dims = {}
    for mu in (F(1, 8), F(1, 4)):
        mc = middle_convolution(estar, mu)
        dims[format_scalar(mu)] = (mc.dim, dimension_formula(estar, mu))
    ok = poly_ok and idx == 2 and dims == {"1/8": (2, 2), "1/4": (1, 1)}
    verdict(capsys, "4 rank-one example canonical form, index, mc dimensions", ok, f"idx={idx} dims={dims}")


def test_c05_theorem_suite(capsys, corpus):
    t = time.perf_counter()
    reps = run_corpus(corpus, ("theorems",))
    dt = time.perf_counter() - t
    bad = failures(reps)
    kinds = {r["check"] for r in reps}
    need = {"fuchsian", "index", "kl-invariance", "kl-explicit", "irreducibility", "part-sums"}
    ok = not bad and need <= kinds and dt < 60 and len(corpus) >= 200
    verdict(capsys, "5 theorem suite on the seeded corpus", ok,
            f"{len(reps)} checks, {len(bad)} failed, {dt:.1f}s")


def test_c06_mc0_identity(capsys, corpus):
    bad = failures(run_corpus(corpus, ("mc0",)))
    verdict(capsys, "6 mu=1 isomorphism witness on the corpus", not bad, f"{len(bad)} failed")


def test_c07_psi_composition(capsys, corpus):
    reps = run_corpus(corpus, ("psi",))
    bad = failures(reps)
    mults = {r["details"]["composed_multiplier"] for r in reps}
    ok = not bad and mults == {"-5/8", "5/2"}
    verdict(capsys, "7 psi composition on the corpus", ok, f"{len(reps)} checks, {len(bad)} failed, {sorted(mults)}")


def test_c08_oracle(capsys, corpus, heine, e3):
    reps = run_corpus(corpus, ("oracle",))
    reps += [oracle_check_polynomial(heine, "heine"), oracle_check_polynomial(e3, "qhg")]
    bad = failures(reps)
    verdict(capsys, "8 Smith form vs companion matrix divisor types", not bad, f"{len(reps)} checks, {len(bad)} failed")


def test_c09_jordan_and_type_predictions(capsys, predictions):
    names = {"endpoint-jordan-0", "endpoint-jordan-inf", "conv-spectral-type"}
    reps = [r for r in predictions if r["check"] in names]
    bad = failures(reps)
    zero = sum(1 for r in reps if r["check"] == "endpoint-jordan-0" and r["details"]["merge"])
    inf = sum(1 for r in reps if r["check"] == "endpoint-jordan-inf" and r["details"]["merge"])
    hits = sum(1 for r in reps if r["check"] == "conv-spectral-type" and r["details"]["pole_hits"])
    ok = not bad and zero and inf and hits
    verdict(capsys, "9 endpoint Jordan and spectral type predictions", ok,
            f"{len(reps)} checks, {len(bad)} failed, branches zero={zero} inf={inf} pole={hits}")


def test_c09_intersection_table_as_stated(capsys, predictions):
    reps = [r for r in predictions if r["check"] == "kl-intersections"]
    bad = failures(reps)
    verdict(capsys, "9 K/L intersection dimensions, stated table", bool(reps) and not bad,
            f"{len(reps)} checks, {len(bad)} failed")


def test_c09_intersection_table_derived(capsys, predictions):
    reps = [r for r in predictions if r["check"] == "kl-intersections-derived"]
    bad = failures(reps)
    verdict(capsys, "9 K/L intersection dimensions, chain-count table", bool(reps) and not bad,
            f"{len(reps)} checks, {len(bad)} failed")


def test_c10_adjugate(capsys, corpus):
    bad = failures(run_corpus(corpus, ("adjugate",)))
    verdict(capsys, "10 adjugate system index on the corpus", not bad, f"{len(bad)} failed")


def test_c11_numerics(capsys):
    import random

    t = time.perf_counter()
    ctx = QContext(0.5)
    rng = random.Random(0)
    worst = 0.0
    mu = 0.3 + 0.1j
    for _ in range(100):
        xv = complex(rng.uniform(0.2, 3), rng.uniform(-1, 1))
        s = complex(rng.uniform(0.05, 2), rng.uniform(-1, 1))
        P = kernel_P(xv, s, mu, ctx)
        sx = kernel_P(0.5 * xv, s, mu, ctx)
        rels = [
            (sx, (1 - mu * s / xv) / (1 - s / xv) * P),
            (sx, kernel_P(xv, s / 0.5, mu, ctx)),
            (xv * theta(0.5 * xv, ctx), theta(xv, ctx)),
            (theta(xv, ctx), qpochhammer_inf(0.5, ctx) * qpochhammer_inf(-xv, ctx) * qpochhammer_inf(-0.5 / xv, ctx)),
            (qpochhammer_inf(s, ctx), (1 - s) * qpochhammer_inf(0.5 * s, ctx)),
        ]
        worst = max(worst, *(abs(a - b) / max(abs(a), abs(b)) for a, b in rels))
    finite = abs(kernel_P(1, 0.125, 0.25, ctx) - 512 / 465)
    rep = euler_transform_check()
    dt = time.perf_counter() - t
    ok = (worst < 1e-10 and finite < 1e-12 and rep["verdict"] == "pass"
          and max(rep["residuals"].values()) < 1e-6 and max(rep["halving_stability"]) < 1e-6 and dt < 10)
    verdict(capsys, "11 kernel, theta, Pochhammer identities and Euler transform residual", ok,
            f"worst={worst:.1e} finite={finite:.1e} residual={max(rep['residuals'].values()):.1e} {dt:.2f}s")


def test_c12_backend_parity(capsys, corpus, heine, e3):
    reps = run_corpus(corpus, ("parity",))
    reps += [parity_check_polynomial(heine, "heine"), parity_check_polynomial(e3, "qhg")]
    bad = failures(reps)
    verdict(capsys, "12 exact vs numeric spectral types and index", not bad, f"{len(reps)} checks, {len(bad)} failed")

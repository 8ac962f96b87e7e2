"""Property suites run over single systems or a seeded corpus.

Each check yields a report ``{check, system-id, status, details{expected, computed}}``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Sequence

from .algebra import format_scalar, multiplicity
from .convolution import (
    K_space, L_space, check_condition_star, check_condition_star_star, condition_star_witness,
    dimension_formula, is_irreducible, kl_intersection_report, mc0_isomorphism_witness,
    middle_convolution, psi_composition_check, q_convolution, submodule_check, system_matrices,
)
from .corpus import CorpusEntry, generate_corpus
from .errors import CollapseError
from .linalg import Matrix, is_invariant, subspace_intersection
from .spectra import (
    adjugate_system_check, divisor_spectral_type, divisor_spectral_type_via_companion,
    idx_from_spectral_type, jordan_normal_form_key, jordan_spectral_type,
    predict_conv_endpoint_jordan, predict_conv_spectral_type, spectral_type,
)
from .system import PartialFractionSystem, canonical_from_partial_fraction, canonical_polynomial, fuchsian_check

SUITES = ("theorems", "mc0", "psi", "oracle", "predictions", "adjugate", "parity")
PSI_PAIRS = ((Fraction(1, 8), Fraction(1, 4)), (Fraction(3), Fraction(1, 2)))


def report(check: str, name: str, ok: bool, expected, computed, **extra) -> dict:
    details = {"expected": expected, "computed": computed}
    details.update(extra)
    return {"check": check, "system-id": name, "status": "pass" if ok else "fail", "details": details}


def _canonical(E: PartialFractionSystem):
    return canonical_polynomial(canonical_from_partial_fraction(E))


def _sum_checks(S, A) -> tuple[bool, dict]:
    """Part sums, evenness, and divisor multiplicities against det A."""
    det = A.polymat().det()
    mult_ok = all(sum(g.n) == multiplicity(det, g.label) for g in S.Sdiv)
    idx = idx_from_spectral_type(S)
    ok = S.sums_consistent() and idx % 2 == 0 and mult_ok
    return ok, {"sums": list(S.part_sums()), "idx": idx, "det_multiplicities": mult_ok}


# ---------------------------------------------------------------------------
# theorem suite
# ---------------------------------------------------------------------------

def theorem_checks(entry: CorpusEntry) -> list[dict]:
    E = entry.system
    name = E.name
    out = []
    A = canonical_from_partial_fraction(E)
    S = spectral_type(A)
    idx = idx_from_spectral_type(S)
    ok, info = _sum_checks(S, A)
    out.append(report("part-sums", name, ok, {"sums": [E.m, E.m, E.N * E.m], "even": True}, info))
    irr = is_irreducible(system_matrices(E))
    if entry.invariant_subspace is not None and irr:
        out.append(report("planted-reducible", name, False, False, True))
    for mu in entry.multipliers:
        tag = f"{name}@{format_scalar(mu)}"
        try:
            mc = middle_convolution(E, mu)
        except CollapseError:
            out.append(report("collapse", tag, False, "nonzero result", "K+L is everything"))
            continue
        conv = mc.conv
        K, L = mc.K, mc.L
        inv_ok = all(is_invariant(M, X) for X in (K, L) for M in (*conv.F, conv.F_inf))
        out.append(report("kl-invariance", tag, inv_ok, True, inv_ok))
        if mu != 1:
            explicit_ok = subspace_intersection(K, L).dim == 0
            formula = dimension_formula(E, mu)
            out.append(report("kl-explicit", tag, explicit_ok and formula == mc.dim,
                              {"K&L": 0, "dim": formula},
                              {"K&L": subspace_intersection(K, L).dim, "dim": mc.dim}))
        G = _canonical(mc.system)
        fu = fuchsian_check(G)
        out.append(report("fuchsian", tag, fu, True, fu))
        if fu:
            Sg = spectral_type(G)
            idx_g = idx_from_spectral_type(Sg) if Sg.sums_consistent() else None
            out.append(report("index", tag, idx_g == idx, idx, idx_g, spectral_type=Sg.render()))
            ok, info = _sum_checks(Sg, G)
            out.append(report("part-sums", tag, ok,
                              {"sums": [G.m, G.m, G.N * G.m], "even": True}, info))
        irr_mc = is_irreducible(system_matrices(mc.system))
        out.append(report("irreducibility", tag, irr == irr_mc, irr, irr_mc))
        cond = check_condition_star(mc.system) and check_condition_star_star(mc.system)
        out.append(report("conditions-preserved", tag, cond, True, cond))
        if entry.invariant_subspace is not None:
            out.append(submodule_check(E, entry.invariant_subspace, mu) | {"system-id": tag})
    return out


def mc0_checks(entry: CorpusEntry) -> list[dict]:
    return [mc0_isomorphism_witness(entry.system)]


def psi_checks(entry: CorpusEntry) -> list[dict]:
    out = []
    for mu1, mu2 in PSI_PAIRS:
        r = psi_composition_check(entry.system, mu1, mu2)
        r["system-id"] = f"{entry.name}@{format_scalar(mu1)},{format_scalar(mu2)}"
        out.append(r)
    return out


def oracle_check_polynomial(A, name: str) -> dict:
    smith = divisor_spectral_type(A.polymat())
    comp = divisor_spectral_type_via_companion(A.polymat())

    def key(groups):
        return sorted((g.n, str(g.label)) for g in groups)

    ok = key(smith) == key(comp)
    return report("oracle", name, ok, [g.to_json() for g in smith], [g.to_json() for g in comp])


def oracle_checks(entry: CorpusEntry) -> list[dict]:
    return [oracle_check_polynomial(canonical_from_partial_fraction(entry.system), entry.name)]


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------

def _has_root(groups, value) -> bool:
    return any(g.label(value) == 0 for g in groups)


def prediction_checks(entry: CorpusEntry) -> list[dict]:
    E = entry.system
    A = canonical_from_partial_fraction(E)
    S = spectral_type(A)
    binf = E.b_inf
    n = (E.N + 1) * E.m
    out = []
    for mu in entry.multipliers:
        tag = f"{E.name}@{format_scalar(mu)}"
        conv = q_convolution(E, mu)
        G0 = Matrix.identity(n) - conv.system.B0
        Ginf = conv.F_inf.scale(binf)
        pred0, pred_inf = predict_conv_endpoint_jordan(S, mu, binf)
        got0, got_inf = jordan_spectral_type(G0), jordan_spectral_type(Ginf)
        branches = {
            "zero-merge": _has_root(S.S0, mu),
            "inf-merge": _has_root(S.Sinf, binf),
        }
        ok = jordan_normal_form_key(pred0) == jordan_normal_form_key(got0)
        out.append(report("endpoint-jordan-0", tag, ok, jordan_normal_form_key(pred0),
                          jordan_normal_form_key(got0), merge=branches["zero-merge"]))
        ok = jordan_normal_form_key(pred_inf) == jordan_normal_form_key(got_inf)
        out.append(report("endpoint-jordan-inf", tag, ok, jordan_normal_form_key(pred_inf),
                          jordan_normal_form_key(got_inf), merge=branches["inf-merge"]))
        Gx = canonical_from_partial_fraction(conv.system)
        got = spectral_type(Gx)
        pred = predict_conv_spectral_type(S, mu, binf, E.poles)
        hits = [format_scalar(b) for b in E.poles if any(g.label(b / mu) == 0 for g in S.Sdiv)]
        out.append(report("conv-spectral-type", tag, pred.normal_form() == got.normal_form(),
                          pred.render(), got.render(), pole_hits=hits))
        if mu != 1:
            for table in ("stated", "derived"):
                r = kl_intersection_report(E, mu, table=table)
                r["system-id"] = tag
                out.append(r)
    return out


def adjugate_checks(entry: CorpusEntry) -> list[dict]:
    A = canonical_from_partial_fraction(entry.system)
    r = adjugate_system_check(A)
    r["system-id"] = entry.name
    return [r]


def parity_check_polynomial(A, name: str) -> dict:
    exact = spectral_type(A)
    numeric = spectral_type(A, backend="numeric")
    idx_e = idx_from_spectral_type(exact)
    idx_n = idx_from_spectral_type(numeric) if numeric.sums_consistent() else None
    ok = exact.render() == numeric.render() and idx_e == idx_n
    return report("backend-parity", name, ok, {"type": exact.render(), "idx": idx_e},
                  {"type": numeric.render(), "idx": idx_n})


def parity_checks(entry: CorpusEntry) -> list[dict]:
    return [parity_check_polynomial(canonical_from_partial_fraction(entry.system), entry.name)]


SUITE_FUNCS = {
    "theorems": theorem_checks,
    "mc0": mc0_checks,
    "psi": psi_checks,
    "oracle": oracle_checks,
    "predictions": prediction_checks,
    "adjugate": adjugate_checks,
    "parity": parity_checks,
}


def run_entry(entry: CorpusEntry, suites: Sequence[str] = SUITES) -> list[dict]:
    out = []
    for s in suites:
        out.extend(SUITE_FUNCS[s](entry))
    return out


def _run_one(args):
    entry, suites = args
    return run_entry(entry, suites)


def run_corpus(entries: Sequence[CorpusEntry], suites: Sequence[str] = SUITES, jobs: int = 1) -> list[dict]:
    tasks = [(e, tuple(suites)) for e in entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_run_one, tasks, chunksize=4))
    else:
        chunks = [_run_one(t) for t in tasks]
    return [r for c in chunks for r in c]


def entry_for_system(E: PartialFractionSystem, multipliers: Sequence = ()) -> CorpusEntry:
    """Wrap a user system so the corpus suites can run on it."""
    mus = tuple(Fraction(m) for m in multipliers)
    return CorpusEntry(E, "user", mus[-1] if mus else Fraction(1, 8), None, mus or None)


def condition_report(E: PartialFractionSystem) -> dict:
    w1 = condition_star_witness(E.residues())
    w2 = condition_star_witness([B.T for B in E.residues()])
    ok = w1 is None and w2 is None
    return report("conditions", E.name, ok, {"star": None, "star-star": None},
                  {"star": w1, "star-star": w2})


def summarize(reports: Sequence[dict]) -> dict:
    by_check: dict = {}
    for r in reports:
        d = by_check.setdefault(r["check"], {"pass": 0, "fail": 0})
        d[r["status"]] += 1
    return by_check


__all__ = [
    "SUITES", "run_corpus", "run_entry", "generate_corpus", "summarize", "condition_report",
    "oracle_check_polynomial", "parity_check_polynomial", "report", "K_space", "L_space",
]

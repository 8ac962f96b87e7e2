"""``qmc`` command line: spectral types, middle convolution, verification suites, numerics."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .algebra import format_scalar
from .convolution import dimension_formula, middle_convolution
from .errors import CollapseError, ConditionViolation, DivergenceWarning, FormatError, NonFuchsianError
from .system import (
    PartialFractionSystem, catalog_E1_spectral_data, catalog_generalized_qhg, catalog_heine,
    canonical_from_partial_fraction, canonical_polynomial, dumps_system, fuchsian_check,
    partial_fraction_from_polynomial, read_system, suggest_poles, write_system,
)
from .linalg import Matrix

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_COLLAPSE, EXIT_FAILED = 0, 2, 3, 4, 5
CATALOG = ("heine", "qhg", "e1", "estar", "corpus")


class UsageError(Exception):
    pass


def make_report(command: str, inputs: dict, results: dict, checks: Sequence[dict] = ()) -> dict:
    return {"command": command, "inputs": inputs, "results": results, "checks": list(checks)}


def _check(name, status, expected, computed) -> dict:
    return {"name": name, "status": status, "expected": expected, "computed": computed}


def parse_mult(text: str, backend: str):
    """Exact runs take rationals only; decimals need ``--backend numeric``."""
    text = text.strip()
    try:
        if backend == "numeric":
            try:
                mu = complex(Fraction(text))
            except ValueError:
                mu = complex(text.replace("i", "j"))
        else:
            if any(c in text for c in ".eEjJi"):
                raise UsageError(f"multiplier {text!r} is not an exact rational; use --backend numeric")
            mu = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse multiplier {text!r}") from exc
    if mu == 0:
        raise UsageError("the multiplier must be nonzero")
    return mu


def _rational_list(text: str) -> list[Fraction]:
    try:
        return [Fraction(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse rational list {text!r}") from exc


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse rational {text!r}") from exc


def _load(path: str, backend: str):
    E = read_system(path)
    if backend == "numeric" and E.is_exact():
        E = E.to_complex()
    return E


def _as_polynomial(E):
    if isinstance(E, PartialFractionSystem):
        return canonical_from_partial_fraction(E)
    return canonical_polynomial(E)


def _as_partial_fraction(E) -> PartialFractionSystem:
    if isinstance(E, PartialFractionSystem):
        return E
    return partial_fraction_from_polynomial(E, suggest_poles(E))


def _emit(report: dict, lines: Sequence[str], as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        for line in lines:
            out.write(line + "\n")


def _table(checks: Sequence[dict]) -> list[str]:
    if not checks:
        return []
    width = max(len(c["name"]) for c in checks)
    return [f"{c['name']:<{width}}  {c['status']}" for c in checks]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_spectype(args) -> int:
    from .spectra import idx_from_spectral_type, spectral_type

    E = _load(args.file, args.backend)
    A = _as_polynomial(E)
    fu = fuchsian_check(A)
    if args.require_fuchsian and not fu:
        raise NonFuchsianError(f"{args.file}: system is not Fuchsian")
    S = spectral_type(A, backend=args.backend)
    idx = idx_from_spectral_type(S) if S.sums_consistent() else None
    report = make_report("spectype", {"file": args.file, "backend": args.backend},
                         {"spectral_type": S.render(), "idx": idx, "fuchsian": fu, "m": A.m, "N": A.N})
    _emit(report, [f"{S.render()} idx={idx}", f"fuchsian={'yes' if fu else 'no'}"], args.json)
    return EXIT_OK


def cmd_mc(args) -> int:
    from .spectra import idx_from_spectral_type, spectral_type

    mu = parse_mult(args.mult, args.backend)
    E = _load(args.file, args.backend)
    if not isinstance(E, PartialFractionSystem):
        raise NonFuchsianError("mc needs a partial-fraction system file")
    if args.require_fuchsian and not fuchsian_check(canonical_from_partial_fraction(E)):
        raise NonFuchsianError(f"{args.file}: system is not Fuchsian")
    mc = middle_convolution(E, mu)
    results = {"mult": format_scalar(mu), "dim_K": mc.K.dim, "dim_L": mc.L.dim, "dim": mc.dim}
    checks = []
    lines = [f"K: {mc.K.dim}", f"L: {mc.L.dim}", f"output dimension: {mc.dim}"]
    if mu != 1:
        formula = dimension_formula(E, mu)
        results["formula"] = formula
        checks.append(_check("dimension-formula", "pass" if formula == mc.dim else "fail", formula, mc.dim))
        lines.append(f"formula: {formula} ({checks[-1]['status']})")
    A, G = canonical_from_partial_fraction(E), canonical_from_partial_fraction(mc.system)
    if fuchsian_check(A) and fuchsian_check(G):
        before = idx_from_spectral_type(spectral_type(A, backend=args.backend))
        after = idx_from_spectral_type(spectral_type(G, backend=args.backend))
        results["idx"] = [before, after]
        checks.append(_check("index", "pass" if before == after else "fail", before, after))
        lines.append(f"idx: {before} -> {after}")
    if args.output:
        write_system(mc.system, args.output)
        results["output"] = args.output
        lines.append(f"wrote {args.output}")
    report = make_report("mc", {"file": args.file, "mult": args.mult, "backend": args.backend},
                         results, checks)
    _emit(report, lines, args.json)
    if not args.output and not args.json:
        sys.stdout.write(dumps_system(mc.system))
    return EXIT_FAILED if any(c["status"] == "fail" for c in checks) else EXIT_OK


def _verify_entries(args):
    from .corpus import generate_corpus
    from .verify import entry_for_system

    mus = tuple(parse_mult(t, "exact") for t in args.mult) if args.mult else None
    entries, systems = [], []
    if args.file:
        systems.append(_as_partial_fraction(read_system(args.file)))
    if args.corpus:
        d = Path(args.corpus)
        if not d.is_dir():
            raise FormatError(f"{d}: not a directory")
        files = sorted(d.glob("*.json"))
        if not files:
            raise FormatError(f"{d}: no system files")
        systems.extend(_as_partial_fraction(read_system(f)) for f in files)
    for E in systems:
        if not E.is_exact():
            raise FormatError(f"{E.name}: verification suites run on rational systems")
        entries.append(entry_for_system(E, mus or ()))
    if args.random:
        gen = generate_corpus(args.random, args.seed)
        if mus:
            gen = [dataclasses.replace(e, multiplier_override=mus) for e in gen]
        entries.extend(gen)
    if not entries:
        raise UsageError("give a system file, --corpus DIR or --random N")
    return entries


def cmd_verify(args) -> int:
    from .verify import SUITES, condition_report, run_corpus, summarize

    suites = tuple(args.suite) if args.suite else SUITES
    entries = _verify_entries(args)
    if args.require_fuchsian:
        for e in entries:
            if not fuchsian_check(canonical_from_partial_fraction(e.system)):
                raise NonFuchsianError(f"{e.name}: system is not Fuchsian")
    reports, runnable, notes = [], [], []
    for e in entries:
        cond = condition_report(e.system)
        if e.flavor == "user":
            reports.append(cond)
        if cond["status"] == "pass":
            runnable.append(e)
        else:
            notes.append(f"{e.name}: conditions fail, theorems not asserted")
            side = [s for s in suites if s in ("oracle", "adjugate", "parity")]
            reports.extend(run_corpus([e], side))
    reports.extend(run_corpus(runnable, suites, args.jobs))
    checks = [_check(f"{r['check']}:{r['system-id']}", r["status"], r["details"].get("expected"),
                     r["details"].get("computed")) for r in reports]
    summary = summarize(reports)
    failed = sum(v["fail"] for v in summary.values())
    report = make_report("verify", {"file": args.file, "corpus": args.corpus, "random": args.random,
                                    "seed": args.seed, "suites": list(suites),
                                    "mult": list(args.mult or [])},
                         {"summary": summary, "notes": notes, "systems": len(entries)}, checks)
    lines = _table(checks) if args.verbose else [c["name"] + "  fail" for c in checks if c["status"] == "fail"]
    lines += [f"{k}: {v['pass']} pass, {v['fail']} fail" for k, v in sorted(summary.items())]
    lines += notes
    lines.append("all checks pass" if not failed else f"{failed} checks failed")
    _emit(report, lines, args.json)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_euler_check(args) -> int:
    from .qnumeric import QContext, ScalarEulerInstance, euler_transform_check

    def num(text):
        try:
            return complex(Fraction(text))
        except ValueError:
            try:
                return complex(text.replace("i", "j"))
            except ValueError as exc:
                raise UsageError(f"cannot parse number {text!r}") from exc

    base = ScalarEulerInstance()
    fields = {"q": args.q, "b": args.b, "b_prime": args.b_prime, "theta_g": args.theta, "mu": args.mult}
    chosen = {k: num(v) for k, v in fields.items() if v is not None}
    if args.x:
        chosen["x_points"] = tuple(num(t) for t in args.x.split(","))
    if chosen.get("mu") == 0:
        raise UsageError("the multiplier must be nonzero")
    inst = dataclasses.replace(base, **chosen)
    try:
        ctx = QContext(inst.q, args.trunc, args.trunc)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DivergenceWarning)
        res = euler_transform_check(instance=inst, ctx=ctx, tol=args.tol)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    checks = [_check(f"residual@{x}", "pass" if r < args.tol else "fail", f"< {args.tol}", r)
              for x, r in res["residuals"].items()]
    checks.append(_check("convergence", "fail" if res["diverged"] else "pass", True, not res["diverged"]))
    checks.append(_check("non-degenerate", "fail" if res["degenerate"] else "pass", True,
                         not res["degenerate"]))
    report = make_report("euler-check", res["instance"], res, checks)
    lines = [f"x={x}  residual={r:.3e}" for x, r in res["residuals"].items()]
    lines.append(f"halving stability: {max(res['halving_stability']):.3e}")
    lines.append(f"verdict: {res['verdict']}")
    _emit(report, lines, args.json)
    return EXIT_OK if res["verdict"] == "pass" else EXIT_FAILED


def _estar() -> PartialFractionSystem:
    return PartialFractionSystem(1, Fraction(1, 2), (Fraction(2),), (Matrix([[Fraction(1, 2)]]),),
                                 Matrix([[Fraction(1, 4)]]), "estar")


def cmd_catalog(args) -> int:
    from .spectra import idx_from_spectral_type

    name = args.name
    if name not in CATALOG:
        raise UsageError(f"unknown catalog entry {name!r}; choose from {', '.join(CATALOG)}")
    if name == "corpus":
        from .corpus import generate_corpus

        if not args.output:
            raise UsageError("catalog corpus needs -o DIR")
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        entries = generate_corpus(args.size, args.seed)
        for e in entries:
            write_system(e.system, out / f"{e.name}.json")
        sys.stdout.write(f"wrote {len(entries)} systems to {out}\n")
        return EXIT_OK
    if name == "e1":
        S = catalog_E1_spectral_data()
        text = json.dumps({"spectral_type": S.to_json(), "render": S.render(),
                           "idx": idx_from_spectral_type(S)}, indent=2) + "\n"
    else:
        q = _rational(args.q)
        if name == "heine":
            E = catalog_heine(_rational(args.alpha), _rational(args.beta), _rational(args.gamma), q)
        elif name == "qhg":
            if args.a is None or args.b is None:
                raise UsageError("qhg needs --a and --b")
            E = catalog_generalized_qhg(_rational_list(args.a), _rational_list(args.b),
                                        _rational(args.lam), q)
        else:
            E = _estar()
        text = dumps_system(E)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmc", description="q-middle convolution toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, backend=True):
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        if backend:
            sp.add_argument("--backend", choices=("exact", "numeric"), default="exact")

    sp = sub.add_parser("spectype", help="spectral type, idx and Fuchsian flag of a system file")
    sp.add_argument("file")
    sp.add_argument("--require-fuchsian", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_spectype)

    sp = sub.add_parser("mc", help="middle convolution of a partial-fraction system")
    sp.add_argument("file")
    sp.add_argument("--mult", required=True, help="multiplier mu, e.g. 1/8")
    sp.add_argument("-o", "--output")
    sp.add_argument("--require-fuchsian", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("verify", help="run the property suites")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--corpus", help="directory of system files")
    sp.add_argument("--random", type=int, default=0, metavar="N", help="add N seeded random systems")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mult", action="append", help="multiplier (repeatable)")
    from .verify import SUITES
    sp.add_argument("--suite", action="append", choices=SUITES)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--require-fuchsian", action="store_true")
    sp.add_argument("-v", "--verbose", action="store_true", help="list every check")
    common(sp, backend=False)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("euler-check", help="Jackson-integral check of the scalar Euler transform")
    sp.add_argument("--q")
    sp.add_argument("--b")
    sp.add_argument("--b-prime", dest="b_prime")
    sp.add_argument("--theta")
    sp.add_argument("--mult")
    sp.add_argument("--x", help="comma-separated evaluation points")
    sp.add_argument("--trunc", type=int, default=60)
    sp.add_argument("--tol", type=float, default=1e-6)
    common(sp, backend=False)
    sp.set_defaults(func=cmd_euler_check)

    sp = sub.add_parser("catalog", help="write a catalog system or spectral data")
    sp.add_argument("name")
    sp.add_argument("--alpha", default="2")
    sp.add_argument("--beta", default="3")
    sp.add_argument("--gamma", default="5")
    sp.add_argument("--q", default="1/2")
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--lambda", dest="lam", default="7")
    sp.add_argument("--size", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_catalog)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (FormatError, FileNotFoundError, IsADirectoryError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (NonFuchsianError, ConditionViolation) as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_PRECONDITION
    except CollapseError as exc:
        sys.stderr.write(f"collapse: {exc}\n")
        return EXIT_COLLAPSE
    except ValueError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""q-difference systems in partial-fraction and polynomial form.

``PartialFractionSystem`` holds the data of

    sigma_x Y(x) = (B_inf + sum_i B_i / (1 - x/b_i)) Y(x),

and ``PolynomialSystem`` holds the coefficients of sigma_x Y(x) = A(x) Y(x).
Both accept exact (``Fraction``) or numeric (``complex``) entries.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .algebra import Poly, format_scalar, is_exact, parse_scalar, poly_gcd, rational_roots
from .errors import DistinctPoleViolation, FormatError, NonFuchsianError
from .linalg import Matrix, PolyMat, inverse, is_invertible, kernel, rank

FORMAT_TAG = "qmc-system-v1"


def _scalar(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return complex(x)


def _all_exact(vals) -> bool:
    return all(isinstance(v, Fraction) for v in vals)


# coefficient lists over an arbitrary field, low degree first

def _cmul(a: list, b: list) -> list:
    out = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _eval(cs: Sequence, x):
    acc = cs[-1] * 0
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def _pole_factor(b) -> list:
    """Coefficients of ``1 - x/b``."""
    one = b * 0 + 1
    return [one, -one / b]


def T_coefficients(poles: Sequence) -> list:
    """Coefficients of ``T(x) = prod (1 - x/b_i)``."""
    one = poles[0] * 0 + 1 if poles else Fraction(1)
    cs = [one]
    for b in poles:
        cs = _cmul(cs, _pole_factor(b))
    return cs


def b_inf_of(poles: Sequence):
    """``prod (-1/b_i)``, the leading coefficient of ``T``."""
    out = poles[0] * 0 + 1 if poles else Fraction(1)
    for b in poles:
        out *= -1 / b
    return out


# ---------------------------------------------------------------------------
# the two system representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartialFractionSystem:
    m: int
    q: object
    poles: tuple
    B: tuple
    B_inf: Matrix
    name: str = field(default="", compare=False)

    def __post_init__(self):
        poles = tuple(_scalar(b) for b in self.poles)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "q", _scalar(self.q))
        object.__setattr__(self, "B", tuple(self.B))
        if any(b == 0 for b in poles):
            raise DistinctPoleViolation("poles must be nonzero")
        if len(set(poles)) != len(poles):
            raise DistinctPoleViolation(f"repeated pole in {[format_scalar(b) for b in poles]}")
        if len(self.B) != len(poles):
            raise FormatError(f"{len(poles)} poles but {len(self.B)} residue matrices")
        for M in (*self.B, self.B_inf):
            if M.shape != (self.m, self.m):
                raise FormatError(f"matrix of shape {M.shape}, expected {(self.m, self.m)}")

    @property
    def N(self) -> int:
        return len(self.poles)

    @property
    def B0(self) -> Matrix:
        return b0_of(self)

    @property
    def b_inf(self):
        return b_inf_of(self.poles)

    def residues(self) -> list[Matrix]:
        """``[B_0, B_1, ..., B_N]``."""
        return [self.B0, *self.B]

    def is_exact(self) -> bool:
        return (
            _all_exact(self.poles)
            and isinstance(self.q, Fraction)
            and all(M.is_exact() for M in (*self.B, self.B_inf))
        )

    def evaluate(self, x) -> Matrix:
        """``B(x)``."""
        out = self.B_inf
        for b, Bi in zip(self.poles, self.B):
            out = out + Bi.scale(1 / (1 - x / b))
        return out

    def to_complex(self) -> "PartialFractionSystem":
        return PartialFractionSystem(
            self.m, complex(self.q), tuple(complex(b) for b in self.poles),
            tuple(M.to_complex() for M in self.B), self.B_inf.to_complex(), self.name,
        )

    def transpose(self) -> "PartialFractionSystem":
        return PartialFractionSystem(
            self.m, self.q, self.poles, tuple(M.T for M in self.B), self.B_inf.T, self.name
        )


@dataclass(frozen=True)
class PolynomialSystem:
    m: int
    q: object
    A: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", _scalar(self.q))
        A = list(self.A)
        while len(A) > 1 and A[-1].is_zero(0.0):
            A.pop()
        object.__setattr__(self, "A", tuple(A))
        if not A:
            raise FormatError("polynomial system needs at least one coefficient")
        for M in A:
            if M.shape != (self.m, self.m):
                raise FormatError(f"matrix of shape {M.shape}, expected {(self.m, self.m)}")
        if A[0].is_zero(0.0):
            raise FormatError("A_0 = 0: x divides A(x); canonicalize first")
        if A[-1].is_zero(0.0):
            raise FormatError("zero polynomial matrix")

    @property
    def N(self) -> int:
        return len(self.A) - 1

    @property
    def A0(self) -> Matrix:
        return self.A[0]

    @property
    def A_inf(self) -> Matrix:
        return self.A[-1]

    def is_exact(self) -> bool:
        return isinstance(self.q, Fraction) and all(M.is_exact() for M in self.A)

    def polymat(self) -> PolyMat:
        return PolyMat.from_coefficients(list(self.A))

    def evaluate(self, x) -> Matrix:
        out = self.A[-1]
        for M in reversed(self.A[:-1]):
            out = out.scale(x) + M
        return out

    def content(self) -> Poly:
        """Monic gcd of all entries of ``A(x)``."""
        return self.polymat().entry_gcd()

    def is_canonical(self) -> bool:
        if self.m == 1:
            return not self.A0.is_zero(0.0)
        return self.content().degree == 0


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def b0_of(E: PartialFractionSystem) -> Matrix:
    out = Matrix.identity(E.m, exact=E.B_inf.is_exact()) - E.B_inf
    for Bi in E.B:
        out = out - Bi
    return out


def canonical_from_partial_fraction(E: PartialFractionSystem) -> PolynomialSystem:
    """``A(x) = T(x) B(x)`` expanded into coefficient matrices."""
    N, m = E.N, E.m
    T = T_coefficients(E.poles)
    coeffs = [E.B_inf.scale(c) for c in T]
    for i, (b, Bi) in enumerate(zip(E.poles, E.B)):
        Ti = T_coefficients(E.poles[:i] + E.poles[i + 1:])
        for k, c in enumerate(Ti):
            coeffs[k] = coeffs[k] + Bi.scale(c)
    tol = None if E.is_exact() else 1e-9
    A0_expected = Matrix.identity(m, E.is_exact()) - E.B0
    AN_expected = E.B_inf.scale(E.b_inf)
    if tol is None:
        assert coeffs[0] == A0_expected and coeffs[N] == AN_expected
    else:
        assert coeffs[0].allclose(A0_expected, tol) and coeffs[N].allclose(AN_expected, tol)
    return PolynomialSystem(m, E.q, tuple(coeffs), E.name)


def partial_fraction_from_polynomial(E: PolynomialSystem, poles: Sequence) -> PartialFractionSystem:
    poles = tuple(_scalar(b) for b in poles)
    if len(poles) != E.N:
        raise ValueError(f"need {E.N} poles, got {len(poles)}")
    if any(b == 0 for b in poles) or len(set(poles)) != len(poles):
        raise DistinctPoleViolation("poles must be distinct and nonzero")
    Bs = []
    for i, b in enumerate(poles):
        Ti = T_coefficients(poles[:i] + poles[i + 1:])
        Bs.append(E.evaluate(b).scale(1 / _eval(Ti, b)))
    B_inf = E.A_inf.scale(1 / b_inf_of(poles))
    out = PartialFractionSystem(E.m, E.q, poles, tuple(Bs), B_inf, E.name)
    if out.is_exact() and E.is_exact():
        for b, Bi in zip(poles, Bs):
            # a pole at a zero of det A loses exactly dim ker A(b_i) in rank
            assert rank(Bi) == E.m - kernel(E.evaluate(b)).dim
    return out


def suggest_poles(E: PolynomialSystem) -> list[Fraction]:
    """Rational zeros of det A(x), padded with fresh nonzero rationals to ``deg A`` poles."""
    d = E.polymat().det()
    roots = [r for r, _ in rational_roots(d)[0] if r != 0] if not d.is_zero() else []
    poles = roots[: E.N]
    k = 1
    while len(poles) < E.N:
        for cand in (Fraction(k + 1), Fraction(-k), Fraction(1, k + 1)):
            if len(poles) < E.N and cand not in poles and (d.is_zero() or d(cand) != 0):
                poles.append(cand)
        k += 1
    return poles


def canonicalize(num: PolyMat, den: Poly | None = None, q=Fraction(1, 2), name: str = "") -> PolynomialSystem:
    """Strip the common polynomial content and power of ``x`` from ``num``.

    The scalar denominator is absorbed by a scalar gauge and dropped.
    """
    if den is not None and den.is_zero():
        raise ValueError("zero denominator")
    g = num.entry_gcd()
    if g.is_zero():
        raise ValueError("zero matrix has no canonical form")
    if num.nrows == 1:
        # a scalar equation keeps its zeros; only the power of x is removed
        g = Poly((0,) * g.valuation() + (1,))
    # g already carries the common power of x
    coeffs = num.map(lambda e: e.exact_div(g)).coefficients()
    return PolynomialSystem(num.nrows, q, tuple(coeffs), name)


def canonical_polynomial(E: PolynomialSystem) -> PolynomialSystem:
    """Canonical form of an exact polynomial system."""
    if not E.is_exact():
        return E
    return canonicalize(E.polymat(), None, E.q, E.name)


@dataclass(frozen=True)
class GaugeMove:
    kind: str  # "similarity" | "constant" | "linear" | "times_x"
    parameter: object = None

    def __post_init__(self):
        if self.kind not in ("similarity", "constant", "linear", "times_x"):
            raise ValueError(f"unknown gauge move {self.kind!r}")
        if self.kind == "constant" and _scalar(self.parameter) == 0:
            raise ValueError("constant gauge must be nonzero")
        if self.kind == "similarity" and not is_invertible(self.parameter):
            raise ValueError("similarity gauge must be invertible")


def apply_gauge(E: PolynomialSystem, g: GaugeMove) -> PolynomialSystem:
    if g.kind == "similarity":
        P = g.parameter
        Pi = inverse(P)
        return PolynomialSystem(E.m, E.q, tuple(P @ M @ Pi for M in E.A), E.name)
    if g.kind == "constant":
        c = _scalar(g.parameter)
        return PolynomialSystem(E.m, E.q, tuple(M.scale(c) for M in E.A), E.name)
    if g.kind == "linear":
        a = _scalar(g.parameter)
        coeffs = list(E.A) + [E.A[0].scale(0)]
        new = [coeffs[0]] + [coeffs[k] - coeffs[k - 1].scale(a) for k in range(1, len(coeffs))]
        return PolynomialSystem(E.m, E.q, tuple(new), E.name)
    # times_x: x A(x) has zero constant term, so the canonical form is A itself
    shifted = [E.A[0].scale(0)] + list(E.A)
    if E.is_exact():
        return canonicalize(PolyMat.from_coefficients(shifted), None, E.q, E.name)
    return E


def fuchsian_check(E: PolynomialSystem, tol: float | None = None) -> bool:
    if E.is_exact() and tol is None:
        return is_invertible(E.A0) and is_invertible(E.A_inf)
    t = 1e-9 if tol is None else tol
    return is_invertible(E.A0, t) and is_invertible(E.A_inf, t)


def require_fuchsian(E: PolynomialSystem) -> None:
    if not fuchsian_check(E):
        raise NonFuchsianError("A_0 or A_N is singular")


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def catalog_heine(alpha, beta, gamma, q) -> PolynomialSystem:
    """Heine's basic hypergeometric equation written as a 2x2 first-order system."""
    a, b, c, q = (_scalar(v) for v in (alpha, beta, gamma, q))
    if a * b == 0 or c == 0:
        raise ValueError("need alpha*beta != 0 and gamma != 0")
    ab = a * b
    A0 = Matrix([[-c / q, c / q], [0, -1]])
    A1 = Matrix([[ab, -ab], [(1 - a) * (1 - b), a + b - ab]])
    E = PolynomialSystem(2, q, (A0, A1), "heine")
    if not fuchsian_check(E):
        warnings.warn("degenerate Heine parameters: A_0 or A_inf is singular", stacklevel=2)
    return E


def _expand_factors(roots, scale=1) -> list:
    """Coefficients (in powers of sigma) of ``prod (r*scale*sigma - 1)``."""
    cs = [Fraction(1)]
    for r in roots:
        cs = _cmul(cs, [Fraction(-1), r * scale])
    return cs


def catalog_generalized_qhg(a: Sequence, b: Sequence, lam, q) -> PolynomialSystem:
    """Companion system of the generalized basic hypergeometric operator."""
    a = [_scalar(v) for v in a]
    b = [_scalar(v) for v in b]
    lam, q = _scalar(lam), _scalar(q)
    if len(a) != len(b):
        raise ValueError("a and b must have the same length")
    if any(v == 0 for v in (*a, *b, lam)):
        raise ValueError("parameters must be nonzero")
    m = len(a)
    left = _expand_factors(b, 1 / q)   # prod(b_k/q sigma - 1), index = power of sigma
    right = _expand_factors(a)          # prod(a_k sigma - 1)
    # f_j multiplies sigma^(m-j): constant part and x part
    f = [(left[m - j], -lam * right[m - j]) for j in range(m + 1)]
    zero = Fraction(0)
    A0 = [[zero] * m for _ in range(m)]
    A1 = [[zero] * m for _ in range(m)]
    for i in range(m - 1):
        A0[i][i + 1], A1[i][i + 1] = f[0]
    for j in range(m):
        c0, c1 = f[m - j]
        A0[m - 1][j], A1[m - 1][j] = -c0, -c1
    return PolynomialSystem(m, q, (Matrix(A0), Matrix(A1)), "generalized-qhg")


def catalog_qhg_f(a: Sequence, b: Sequence, lam, q) -> list[Poly]:
    """The operator coefficients ``f_0, ..., f_m`` as polynomials in x."""
    a = [_scalar(v) for v in a]
    b = [_scalar(v) for v in b]
    lam, q = _scalar(lam), _scalar(q)
    m = len(a)
    left = _expand_factors(b, 1 / q)
    right = _expand_factors(a)
    return [Poly((left[m - j], -lam * right[m - j])) for j in range(m + 1)]


def catalog_E1_spectral_data():
    """Symbolic spectral data of a rank-5, degree-2 example with idx 0."""
    from .spectra import DivisorGroup, EigenGroup, SpectralType

    S0 = [EigenGroup("alpha1_0", (2, 1, 1)), EigenGroup("alpha2_0", (1,))]
    Sinf = [EigenGroup("alpha1_inf", (1, 1, 1)), EigenGroup("alpha2_inf", (1,)),
            EigenGroup("alpha3_inf", (1,))]
    # orders of a_1..a_4 in d_1, ..., d_5
    Sdiv = [DivisorGroup("a1", (1, 1, 1, 1)), DivisorGroup("a2", (2, 1, 1)),
            DivisorGroup("a3", (1,)), DivisorGroup("a4", (1,))]
    return SpectralType(5, 2, S0, Sinf, Sdiv)


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

_COMMON_KEYS = {"format", "kind", "scalars", "m", "q"}
_KIND_KEYS = {
    "partial-fraction": _COMMON_KEYS | {"poles", "B", "B_inf"},
    "polynomial": _COMMON_KEYS | {"A"},
}


_RATIONAL_TEXT = re.compile(r"\s*[+-]?\d+(/\d+)?\s*$")


def _parse_token(tok, scalars: str):
    if scalars == "rational":
        if isinstance(tok, bool) or not isinstance(tok, (str, int)):
            raise FormatError(f"rational scalar expected, got {tok!r}")
        if isinstance(tok, str) and not _RATIONAL_TEXT.match(tok):
            raise FormatError(f"rational scalar must read 'p' or 'p/q', got {tok!r}")
    elif not (isinstance(tok, list) and len(tok) == 2
              and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in tok)):
        raise FormatError(f"complex scalar [re, im] expected, got {tok!r}")
    try:
        return parse_scalar(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(str(exc)) from exc


def _parse_matrix(obj, m: int, scalars: str, what: str) -> Matrix:
    if not isinstance(obj, list) or len(obj) != m or any(
        not isinstance(r, list) or len(r) != m for r in obj
    ):
        raise FormatError(f"{what}: expected a {m}x{m} array of arrays")
    return Matrix([[_parse_token(t, scalars) for t in r] for r in obj])


def system_from_dict(d: dict, name: str = ""):
    if not isinstance(d, dict):
        raise FormatError("top level must be an object")
    if d.get("format") != FORMAT_TAG:
        raise FormatError(f"format must be {FORMAT_TAG!r}")
    kind = d.get("kind")
    if kind not in _KIND_KEYS:
        raise FormatError(f"unknown kind {kind!r}")
    extra = set(d) - _KIND_KEYS[kind]
    if extra:
        raise FormatError(f"unknown fields: {sorted(extra)}")
    missing = _KIND_KEYS[kind] - set(d)
    if missing:
        raise FormatError(f"missing fields: {sorted(missing)}")
    scalars = d["scalars"]
    if scalars not in ("rational", "complex-f64"):
        raise FormatError(f"unknown scalars {scalars!r}")
    m = d["m"]
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise FormatError("m must be a positive integer")
    q = _parse_token(d["q"], scalars)
    if kind == "partial-fraction":
        if not isinstance(d["poles"], list) or not isinstance(d["B"], list):
            raise FormatError("poles and B must be arrays")
        poles = [_parse_token(t, scalars) for t in d["poles"]]
        B = [_parse_matrix(M, m, scalars, f"B[{i}]") for i, M in enumerate(d["B"])]
        B_inf = _parse_matrix(d["B_inf"], m, scalars, "B_inf")
        return PartialFractionSystem(m, q, tuple(poles), tuple(B), B_inf, name)
    if not isinstance(d["A"], list) or not d["A"]:
        raise FormatError("A must be a non-empty array")
    A = [_parse_matrix(M, m, scalars, f"A[{i}]") for i, M in enumerate(d["A"])]
    return PolynomialSystem(m, q, tuple(A), name)


def _fmt_matrix(M: Matrix):
    return [[format_scalar(x) for x in r] for r in M.rows]


def system_to_dict(E) -> dict:
    exact = E.is_exact()
    fmt = format_scalar if exact else (lambda x: format_scalar(complex(x)))
    mat = _fmt_matrix if exact else (lambda M: _fmt_matrix(M.to_complex()))
    d = {"format": FORMAT_TAG}
    if isinstance(E, PartialFractionSystem):
        d["kind"] = "partial-fraction"
        d["scalars"] = "rational" if exact else "complex-f64"
        d["m"] = E.m
        d["q"] = fmt(E.q)
        d["poles"] = [fmt(b) for b in E.poles]
        d["B"] = [mat(M) for M in E.B]
        d["B_inf"] = mat(E.B_inf)
    else:
        d["kind"] = "polynomial"
        d["scalars"] = "rational" if exact else "complex-f64"
        d["m"] = E.m
        d["q"] = fmt(E.q)
        d["A"] = [mat(M) for M in E.A]
    return d


def dumps_system(E) -> str:
    return json.dumps(system_to_dict(E), indent=2) + "\n"


def read_system(path):
    p = Path(path)
    try:
        d = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}: invalid JSON: {exc}") from exc
    return system_from_dict(d, p.stem)


def write_system(E, path) -> None:
    Path(path).write_text(dumps_system(E), encoding="utf-8")

"""Seeded generator of small rational partial-fraction systems for property checks.

Every system is drawn with a few planted features so that the resonant branches
of the convolution predictions actually occur:

* ``L``: B_inf has a rational eigenvalue r and the resonant multiplier is r
* ``zero``: A_0 has a rational eigenvalue r and the resonant multiplier is r
* ``div``: some B_j is singular and the multiplier is b_k / b_j
* ``inf-one``: B_inf has eigenvalue 1, so A_inf has eigenvalue b_inf
* ``reducible``: all residues share a rational invariant subspace W
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .convolution import check_condition_star, check_condition_star_star
from .linalg import Matrix, Subspace, inverse, is_invertible
from .system import PartialFractionSystem, canonical_from_partial_fraction, fuchsian_check

FLAVORS = ("L", "zero", "div", "inf-one", "reducible")
FIXED_MULTIPLIERS = (Fraction(3), Fraction(1, 8))
SHAPES = ((1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1), (2, 3), (3, 2), (3, 3))

_POLES = [Fraction(x) for x in ("1", "2", "3", "-1", "-2", "1/2", "-1/2", "3/2", "-3", "5/2")]
_EIGEN = [Fraction(x) for x in ("2", "-1", "1/2", "-2", "3/2", "1/3", "-1/2", "5/3", "4")]


@dataclass(frozen=True)
class CorpusEntry:
    system: PartialFractionSystem
    flavor: str
    resonant_mu: Fraction
    invariant_subspace: Subspace | None = None
    multiplier_override: tuple | None = None

    @property
    def name(self) -> str:
        return self.system.name

    @property
    def multipliers(self) -> tuple:
        if self.multiplier_override is not None:
            return self.multiplier_override
        return (*FIXED_MULTIPLIERS, self.resonant_mu)


def _small(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-3, 3), rng.choice((1, 1, 2, 3)))


def _random_matrix(rng, m: int) -> Matrix:
    return Matrix([[_small(rng) for _ in range(m)] for _ in range(m)])


def _unimodular(rng, m: int) -> Matrix:
    L = [[Fraction(int(i == j)) if j >= i else Fraction(rng.randint(-1, 1)) for j in range(m)] for i in range(m)]
    U = [[Fraction(int(i == j)) if j <= i else Fraction(rng.randint(-1, 1)) for j in range(m)] for i in range(m)]
    return Matrix(L) @ Matrix(U)


def _with_eigenvalue(rng, m: int, r: Fraction) -> Matrix:
    """Random matrix having r as an eigenvalue (first coordinate of a triangular form)."""
    M = [list(row) for row in _random_matrix(rng, m).rows]
    M[0][0] = r
    for i in range(1, m):
        M[i][0] = Fraction(0)
    return Matrix(M)


def _singular(rng, m: int) -> Matrix:
    M = [list(row) for row in _random_matrix(rng, m).rows]
    c = [_small(rng) for _ in range(m - 1)]
    M[-1] = [sum((ci * M[i][j] for i, ci in enumerate(c)), Fraction(0)) for j in range(m)]
    return Matrix(M)


def _upper_block(rng, M: Matrix, k: int) -> Matrix:
    rows = [list(r) for r in M.rows]
    for i in range(k, M.nrows):
        for j in range(k):
            rows[i][j] = Fraction(0)
    return Matrix(rows)


def _draw(rng, m: int, N: int, flavor: str, name: str) -> CorpusEntry | None:
    poles = tuple(rng.sample(_POLES, N))
    r_inf = Fraction(1) if flavor == "inf-one" else rng.choice(_EIGEN)
    r_0 = rng.choice(_EIGEN)
    P = _unimodular(rng, m)
    Pi = inverse(P)
    B_inf_t = _with_eigenvalue(rng, m, r_inf)
    A0_t = _with_eigenvalue(rng, m, r_0)
    Bs_t = [_random_matrix(rng, m) for _ in range(N - 1)]
    sing = None
    if flavor == "div" and N >= 2 and m >= 2:
        sing = rng.randrange(N - 1)
        Bs_t[sing] = _singular(rng, m)
    k = None
    if flavor == "reducible":
        k = rng.randint(1, m - 1)
        B_inf_t, A0_t = _upper_block(rng, B_inf_t, k), _upper_block(rng, A0_t, k)
        Bs_t = [_upper_block(rng, B, k) for B in Bs_t]
    # A_0 = sum_i B_i + B_inf fixes the last residue
    last = A0_t - B_inf_t
    for B in Bs_t:
        last = last - B
    Bs_t.append(last)
    conj = lambda X: P @ X @ Pi  # noqa: E731
    B = tuple(conj(X) for X in Bs_t)
    E = PartialFractionSystem(m, Fraction(1, 2), poles, B, conj(B_inf_t), name)
    W = None
    if k is not None:
        W = Subspace(m, [P.column(j) for j in range(k)])
    if flavor == "L":
        mu = r_inf
    elif flavor == "div" and sing is not None:
        j = sing
        kk = rng.choice([i for i in range(N) if i != j])
        mu = poles[kk] / poles[j]
    else:
        mu = r_0
    if mu in (0, 1, *FIXED_MULTIPLIERS):
        return None
    return CorpusEntry(E, flavor, mu, W)


def admissible(E: PartialFractionSystem) -> bool:
    if not is_invertible(E.B_inf) or not is_invertible(Matrix.identity(E.m) - E.B0):
        return False
    P = canonical_from_partial_fraction(E)
    if not fuchsian_check(P) or not P.is_canonical():
        return False
    return check_condition_star(E) and check_condition_star_star(E)


def generate_corpus(size: int = 200, seed: int = 0) -> list[CorpusEntry]:
    """Deterministic list of ``size`` admissible systems."""
    rng = random.Random(seed)
    out: list[CorpusEntry] = []
    attempt = 0
    while len(out) < size:
        attempt += 1
        if attempt > 200 * size:
            raise RuntimeError("corpus generation is not converging")
        m, N = SHAPES[len(out) % len(SHAPES)]
        flavor = FLAVORS[len(out) % len(FLAVORS)]
        if flavor == "reducible" and m == 1:
            flavor = "L"
        if flavor == "div" and (N < 2 or m < 2):
            flavor = "zero"
        entry = _draw(rng, m, N, flavor, f"c{seed}-{len(out):03d}")
        if entry is not None and admissible(entry.system):
            out.append(entry)
    return out

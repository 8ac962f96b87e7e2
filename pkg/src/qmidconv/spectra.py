"""Spectral types, rigidity index and the predicted effect of convolution."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (
    Poly, coprime_basis, conjugate_partition, format_scalar, multiplicity,
    normalize_partition, rational_roots, squarefree_decomposition,
)
from .errors import NonFuchsianError
from .linalg import (
    EPS_RANK, Matrix, PolyMat, Subspace, charpoly, generalized_kernel_dims, inverse, kernel,
    poly_at_matrix, rank, smith_normal_form,
)
from .system import PolynomialSystem, fuchsian_check

EPS_CLUSTER = 1e-7
DEFECT_RADIUS = 1e-4


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

def _label_degree(label) -> int:
    return label.degree if isinstance(label, Poly) else 1


def label_text(label) -> str:
    """Root for linear labels, polynomial text otherwise."""
    if isinstance(label, Poly):
        if label.degree == 1:
            return format_scalar(-label.coeffs[0] / label.coeffs[1])
        return str(label)
    if isinstance(label, complex):
        return f"{label.real:.12g}{label.imag:+.12g}j"
    if isinstance(label, Fraction):
        return format_scalar(label)
    return str(label)


def label_root(label):
    """The root carried by a degree-one label, else None."""
    if isinstance(label, Poly):
        return -label.coeffs[0] / label.coeffs[1] if label.degree == 1 else None
    if isinstance(label, (Fraction, complex)):
        return label
    return None


@dataclass(frozen=True)
class EigenGroup:
    """Eigenvalue group: Jordan sizes ``t`` and multiplicities ``m`` (conjugate)."""

    label: object
    t: tuple

    def __post_init__(self):
        object.__setattr__(self, "t", normalize_partition(self.t))

    @property
    def m(self) -> tuple:
        return conjugate_partition(self.t)

    @property
    def degree(self) -> int:
        return _label_degree(self.label)

    @classmethod
    def from_multiplicities(cls, label, m: Sequence[int]) -> "EigenGroup":
        return cls(label, conjugate_partition(normalize_partition(m)))

    def to_json(self) -> dict:
        return {"label": label_text(self.label), "t": list(self.t), "m": list(self.m)}


@dataclass(frozen=True)
class DivisorGroup:
    """Zero group of det A(x): orders ``orders`` in d_1, d_2, ... and ``n`` (conjugate)."""

    label: object
    orders: tuple

    def __post_init__(self):
        object.__setattr__(self, "orders", normalize_partition(self.orders))

    @property
    def n(self) -> tuple:
        return conjugate_partition(self.orders)

    @property
    def degree(self) -> int:
        return _label_degree(self.label)

    @classmethod
    def from_n(cls, label, n: Sequence[int]) -> "DivisorGroup":
        return cls(label, conjugate_partition(normalize_partition(n)))

    def to_json(self) -> dict:
        return {"label": label_text(self.label), "t": list(self.orders), "m": list(self.n)}


def _section_sort_key(parts, label):
    return (tuple(-p for p in parts), label_text(label))


def _render_section(groups, parts_of) -> str:
    items = []
    for g in groups:
        items.extend([(parts_of(g), g.label)] * g.degree)
    items.sort(key=lambda it: _section_sort_key(*it))
    return ",".join("-".join(str(p) for p in parts) for parts, _ in items)


@dataclass(frozen=True)
class SpectralType:
    m: int
    N: int
    S0: tuple
    Sinf: tuple
    Sdiv: tuple
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("S0", "Sinf", "Sdiv"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def render(self) -> str:
        return ";".join((
            _render_section(self.S0, lambda g: g.m),
            _render_section(self.Sinf, lambda g: g.m),
            _render_section(self.Sdiv, lambda g: g.n),
        ))

    def __str__(self):
        return self.render()

    def part_sums(self) -> tuple[int, int, int]:
        s0 = sum(g.degree * sum(g.m) for g in self.S0)
        si = sum(g.degree * sum(g.m) for g in self.Sinf)
        sd = sum(g.degree * sum(g.n) for g in self.Sdiv)
        return s0, si, sd

    def sums_consistent(self) -> bool:
        return self.part_sums() == (self.m, self.m, self.N * self.m)

    def normal_form(self):
        """Label-insensitive regrouping: partition -> product of labels (exact labels only)."""

        def fold(groups, parts_of):
            acc: dict = {}
            for g in groups:
                acc.setdefault(parts_of(g), []).append(g.label)
            out = []
            for key, labels in acc.items():
                if all(isinstance(lab, Poly) for lab in labels):
                    prod = Poly.const(1)
                    for lab in labels:
                        prod = prod * lab
                    out.append((key, str(prod)))
                else:
                    out.append((key, ",".join(sorted(label_text(lab) for lab in labels))))
            return tuple(sorted(out))

        return (
            self.m, self.N,
            fold(self.S0, lambda g: g.m),
            fold(self.Sinf, lambda g: g.m),
            fold(self.Sdiv, lambda g: g.n),
        )

    def to_json(self) -> dict:
        return {
            "m": self.m, "N": self.N, "string": self.render(),
            "S0": [g.to_json() for g in self.S0],
            "Sinf": [g.to_json() for g in self.Sinf],
            "Sdiv": [g.to_json() for g in self.Sdiv],
        }


def parse_spectral_type(text: str, m: int | None = None, N: int | None = None) -> SpectralType:
    """Read the ``;``/``,``/``-`` text form; labels become positional names."""
    sections = text.strip().split(";")
    if len(sections) != 3:
        raise ValueError("spectral type needs three ';'-separated sections")

    def parts(sec):
        if not sec:
            return []
        return [normalize_partition(int(p) for p in grp.split("-")) for grp in sec.split(",")]

    p0, pi, pd = (parts(s) for s in sections)
    S0 = [EigenGroup.from_multiplicities(f"alpha{k + 1}_0", p) for k, p in enumerate(p0)]
    Si = [EigenGroup.from_multiplicities(f"alpha{k + 1}_inf", p) for k, p in enumerate(pi)]
    Sd = [DivisorGroup.from_n(f"a{k + 1}", p) for k, p in enumerate(pd)]
    mm = m if m is not None else sum(sum(p) for p in p0)
    if N is None:
        N = sum(sum(p) for p in pd) // mm if mm else 0
    return SpectralType(mm, N, S0, Si, Sd)


# ---------------------------------------------------------------------------
# exact grouping
# ---------------------------------------------------------------------------

def _split_rational(label: Poly) -> list[Poly]:
    """Split off the rational roots of a squarefree monic polynomial as linear factors."""
    roots, _ = rational_roots(label)
    out = []
    rest = label
    for r, _mult in roots:
        lin = Poly.linear_root(r)
        out.append(lin)
        rest = rest.exact_div(lin)
    if rest.degree > 0:
        out.append(rest.monic())
    return out


def _groups_from_factors(factors: Sequence[Poly]) -> list[tuple[Poly, tuple]]:
    """Coprime-basis groups with their order sequence in ``factors`` (largest first)."""
    nonconst = [f for f in factors if f.degree > 0]
    out = []
    for g in coprime_basis(nonconst):
        orders = tuple(o for o in (multiplicity(f, g) for f in factors) if o > 0)
        for lab in _split_rational(g):
            out.append((lab, orders))
    return out


def jordan_spectral_type(M: Matrix, tol: float | None = None) -> list[EigenGroup]:
    """Eigenvalue groups of ``M`` with Jordan partitions."""
    if not M.is_exact() or tol is not None:
        return numeric_jordan_spectral_type(M)
    d, _ = smith_normal_form(PolyMat.x_minus(M))
    return [EigenGroup(lab, t) for lab, t in _groups_from_factors(d)]


def divisor_spectral_type(A: PolyMat) -> list[DivisorGroup]:
    """Zero groups of det A(x) with their orders in the invariant factors."""
    d, r = smith_normal_form(A)
    if r < min(A.nrows, A.ncols):
        raise ValueError("polynomial matrix is singular")
    return [DivisorGroup(lab, orders) for lab, orders in _groups_from_factors(d)]


def companion_matrix(coeffs: Sequence[Matrix]) -> Matrix:
    """Block companion of ``sum A_k x^k``; needs an invertible leading block."""
    N = len(coeffs) - 1
    m = coeffs[0].nrows
    exact = all(C.is_exact() for C in coeffs)
    if N == 0:
        return Matrix._raw([], 0)
    Ainv = inverse(coeffs[-1], None if exact else EPS_RANK)
    Z = Matrix.zeros(m, m, exact)
    I = Matrix.identity(m, exact)
    grid = []
    for i in range(N - 1):
        grid.append([I if j == i + 1 else Z for j in range(N)])
    grid.append([-(Ainv @ coeffs[k]) for k in range(N)])
    return Matrix.blocks(grid)


def _restricted_charpoly(P: Matrix, S: Subspace) -> Poly:
    """Characteristic polynomial of ``P`` on the invariant subspace ``S``."""
    if S.dim == 0:
        return Poly.const(1)
    cols = [[(P @ v)[p] for p in S.pivots] for v in S.vectors]
    return charpoly(Matrix.from_columns(cols, S.dim))


def companion_divisor_type(P: Matrix) -> list[DivisorGroup]:
    """Generalized-eigenspace oracle for elementary-divisor data of ``x - P``.

    Groups are separated by the characteristic polynomials of ``P`` on the
    nested kernels of ``e(P)^j``, so no Smith form is involved.
    """
    out = []
    for e, mult in squarefree_decomposition(charpoly(P)):
        restricted = [e]
        eP = poly_at_matrix(e, P)
        power = eP
        for _ in range(mult):
            K = kernel(power)
            restricted.append(_restricted_charpoly(P, K))
            power = power @ eP
        for g in coprime_basis([r.monic() for r in restricted if r.degree > 0]):
            if multiplicity(e, g) == 0:
                continue
            # dims of ker g(P)^j per unit of degree
            seq = [multiplicity(r, g) for r in restricted[1:]]
            n_parts = [seq[0]] + [seq[j] - seq[j - 1] for j in range(1, len(seq))]
            n_parts = normalize_partition(p for p in n_parts if p > 0)
            for lab in _split_rational(g):
                out.append(DivisorGroup.from_n(lab, n_parts))
    return out


def divisor_spectral_type_via_companion(A: PolyMat) -> list[DivisorGroup]:
    coeffs = A.coefficients()
    if rank(coeffs[-1]) < A.nrows:
        raise ValueError("leading coefficient is singular; companion matrix undefined")
    return companion_divisor_type(companion_matrix(coeffs))


# ---------------------------------------------------------------------------
# numeric grouping
# ---------------------------------------------------------------------------

def cluster_values(vals: Sequence[complex], eps: float = EPS_CLUSTER) -> list[tuple[complex, int]]:
    """Union-find clustering at distance < eps; returns (centroid, size), sorted."""
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) < eps:
                parent[find(i)] = find(j)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(vals[i])
    out = [(complex(sum(g) / len(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda c: (round(c[0].real, 9), round(c[0].imag, 9)))
    return out


def _merge_defective(Mc: Matrix, clusters, tol: float, radius: float):
    """Merge nearby clusters that are one defective eigenvalue split by rounding.

    A Jordan block of size k moves its eigenvalues by about eps**(1/k), far past the
    clustering distance. Two clusters within ``radius`` are merged only when the
    generalized kernel at the merged centroid has the full combined dimension.
    """
    clusters = list(clusters)
    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                (a, na), (b, nb) = clusters[i], clusters[j]
                if abs(a - b) >= radius:
                    continue
                alg = na + nb
                c = (a * na + b * nb) / alg
                if generalized_kernel_dims(Mc, c, alg, tol)[-1] == alg:
                    clusters[i] = (c, alg)
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break
    clusters.sort(key=lambda c: (round(c[0].real, 9), round(c[0].imag, 9)))
    return clusters


def _numeric_partition_groups(M: Matrix, eps_rank: float, eps_cluster: float, log=None):
    arr = M.to_numpy()
    if arr.size == 0:
        return []
    vals = list(np.linalg.eigvals(arr))
    out = []
    Mc = M.to_complex()
    scale = max(1.0, float(np.abs(arr).max()))
    clusters = _merge_defective(Mc, cluster_values(vals, eps_cluster), eps_rank * scale,
                                DEFECT_RADIUS * scale)
    for theta, alg in clusters:
        dims = generalized_kernel_dims(Mc, theta, alg, eps_rank * scale, log)
        inc = [dims[0]] + [dims[j] - dims[j - 1] for j in range(1, len(dims))]
        out.append((theta, normalize_partition(p for p in inc if p > 0)))
    return out


def numeric_jordan_spectral_type(M: Matrix, eps_rank: float = EPS_RANK,
                                 eps_cluster: float = EPS_CLUSTER, log=None) -> list[EigenGroup]:
    return [EigenGroup.from_multiplicities(theta, mparts)
            for theta, mparts in _numeric_partition_groups(M, eps_rank, eps_cluster, log)]


def numeric_divisor_spectral_type(coeffs: Sequence[Matrix], eps_rank: float = EPS_RANK,
                                  eps_cluster: float = EPS_CLUSTER, log=None) -> list[DivisorGroup]:
    P = companion_matrix([C.to_complex() for C in coeffs])
    return [DivisorGroup.from_n(theta, n)
            for theta, n in _numeric_partition_groups(P, eps_rank, eps_cluster, log)]


# ---------------------------------------------------------------------------
# spectral type and index
# ---------------------------------------------------------------------------

def spectral_type(E: PolynomialSystem, backend: str | None = None,
                  eps_rank: float = EPS_RANK, eps_cluster: float = EPS_CLUSTER,
                  log=None) -> SpectralType:
    numeric = backend == "numeric" or (backend is None and not E.is_exact())
    notes = []
    if not fuchsian_check(E, None if not numeric else eps_rank):
        notes.append("non-Fuchsian: part-sum invariants need not hold")
        warnings.warn("spectral type of a non-Fuchsian system", stacklevel=2)
    if numeric:
        S0 = numeric_jordan_spectral_type(E.A0, eps_rank, eps_cluster, log)
        Si = numeric_jordan_spectral_type(E.A_inf, eps_rank, eps_cluster, log)
        Sd = numeric_divisor_spectral_type(E.A, eps_rank, eps_cluster, log) if E.N > 0 else []
    else:
        S0 = jordan_spectral_type(E.A0)
        Si = jordan_spectral_type(E.A_inf)
        Sd = divisor_spectral_type(E.polymat())
    return SpectralType(E.m, E.N, S0, Si, Sd, tuple(notes))


def idx_from_spectral_type(S: SpectralType) -> int:
    if not S.sums_consistent():
        raise ValueError(f"inconsistent part sums {S.part_sums()} for m={S.m}, N={S.N}")
    total = 0
    for g in (*S.S0, *S.Sinf):
        total += g.degree * sum(p * p for p in g.m)
    for g in S.Sdiv:
        total += g.degree * sum(p * p for p in g.n)
    return total - S.m * S.m * S.N


def rigidity_index(E: PolynomialSystem, backend: str | None = None) -> int:
    if not fuchsian_check(E):
        raise NonFuchsianError("rigidity index needs invertible A_0 and A_N")
    return idx_from_spectral_type(spectral_type(E, backend))


def endpoint_centralizer_sum(groups: Sequence[EigenGroup]) -> int:
    return sum(g.degree * sum(p * p for p in g.m) for g in groups)


# ---------------------------------------------------------------------------
# adjugate system
# ---------------------------------------------------------------------------

def predicted_adjugate_divisor_type(S: SpectralType) -> list[DivisorGroup]:
    """Zero data of adj A(x) read off from that of A(x)."""
    m = S.m
    out = []
    for g in S.Sdiv:
        n = g.n
        total, k = sum(n), len(n)
        parts = [m] * (total - k) + [m - p for p in reversed(n)]
        parts = [p for p in parts if p > 0]
        if parts:
            out.append(DivisorGroup.from_n(g.label, parts))
    return out


def adjugate_system_check(E: PolynomialSystem) -> dict:
    from .system import canonicalize

    A = E.polymat()
    S = spectral_type(E)
    idx = idx_from_spectral_type(S)
    adj = A.adjugate()
    raw_div = divisor_spectral_type(adj) if E.m > 1 else []
    predicted = predicted_adjugate_divisor_type(S)
    Et = canonicalize(adj, None, E.q, E.name + "-adj")
    St = spectral_type(Et)
    idx_t = idx_from_spectral_type(St)

    def fold(groups):
        return SpectralType(1, 0, (), (), groups).normal_form()[4]

    div_ok = fold(raw_div) == fold(predicted)
    ends_ok = (
        sorted(g.m for g in S.S0 for _ in range(g.degree))
        == sorted(g.m for g in St.S0 for _ in range(g.degree))
        and sorted(g.m for g in S.Sinf for _ in range(g.degree))
        == sorted(g.m for g in St.Sinf for _ in range(g.degree))
    )
    return {
        "check": "adjugate",
        "status": "pass" if (idx == idx_t and div_ok and ends_ok) else "fail",
        "details": {
            "expected": {"idx": idx, "Sdiv": [g.to_json() for g in predicted]},
            "computed": {"idx": idx_t, "Sdiv": [g.to_json() for g in raw_div],
                         "spectral_type": St.render()},
        },
    }


# ---------------------------------------------------------------------------
# predictions under convolution
# ---------------------------------------------------------------------------

def _find_root_group(groups, value, parts_of):
    for i, g in enumerate(groups):
        lab = g.label
        if isinstance(lab, Poly) and lab(value) == 0:
            return i
        if not isinstance(lab, Poly) and lab == value:
            return i
    return None


def _grow_endpoint(groups: Sequence[EigenGroup], value, Nm: int) -> list[EigenGroup]:
    """Prepend Nm to the multiplicities of the group at ``value`` (or add a fresh one)."""
    out = list(groups)
    i = _find_root_group(out, value, lambda g: g.m)
    if i is None:
        out.append(EigenGroup.from_multiplicities(Poly.linear_root(value), (Nm,)))
    else:
        g = out[i]
        out[i] = EigenGroup.from_multiplicities(g.label, (Nm, *g.m))
    return out


def predict_conv_spectral_type(S: SpectralType, mu, b_inf, poles: Sequence) -> SpectralType:
    """Spectral type of the full convolution predicted from that of the input."""
    N, m = S.N, S.m
    Nm = N * m
    mu = Fraction(mu)
    S0 = _grow_endpoint(S.S0, mu, Nm)
    Sinf = _grow_endpoint(S.Sinf, Fraction(b_inf), Nm)
    Sdiv = []
    hit_poles = set()
    for g in S.Sdiv:
        lab = g.label
        if not isinstance(lab, Poly):
            raise ValueError("prediction needs polynomial zero labels")
        moved = lab.scale_argument(1 / mu).monic()  # roots mu*a
        rest = moved
        for b in poles:
            if lab(Fraction(b) / mu) == 0:
                hit_poles.add(b)
                Sdiv.append(DivisorGroup.from_n(Poly.linear_root(b), (Nm, *g.n)))
                rest = rest.exact_div(Poly.linear_root(b))
        if rest.degree > 0:
            Sdiv.append(DivisorGroup.from_n(rest.monic(), g.n))
    for b in poles:
        if b not in hit_poles:
            Sdiv.append(DivisorGroup.from_n(Poly.linear_root(b), (Nm,)))
    return SpectralType((N + 1) * m, N, S0, Sinf, Sdiv)


def _extend_jordan(groups: Sequence[EigenGroup], value, Nm: int) -> list[EigenGroup]:
    out = list(groups)
    i = _find_root_group(out, value, lambda g: g.t)
    if i is None:
        out.append(EigenGroup(Poly.linear_root(value), (1,) * Nm))
    else:
        g = out[i]
        s = len(g.t)
        out[i] = EigenGroup(g.label, tuple(t + 1 for t in g.t) + (1,) * (Nm - s))
    return out


def predict_conv_endpoint_jordan(S: SpectralType, mu, b_inf) -> tuple[list, list]:
    """Jordan data of the convolved endpoint matrices at 0 and infinity."""
    Nm = S.N * S.m
    return _extend_jordan(S.S0, Fraction(mu), Nm), _extend_jordan(S.Sinf, Fraction(b_inf), Nm)


def jordan_normal_form_key(groups: Sequence[EigenGroup]):
    return SpectralType(1, 0, groups, (), ()).normal_form()[2]

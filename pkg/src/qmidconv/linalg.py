"""Dense matrices over Q or C, subspace arithmetic, quotients and Smith forms.

Exact matrices hold :class:`~fractions.Fraction` entries and all rank
decisions are exact.  Numeric matrices hold ``complex`` entries; every rank
decision compares a pivot magnitude against an absolute threshold and can be
recorded in a :class:`RankLog`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import Poly
from .errors import DimensionMismatch, InvarianceViolation

EPS_RANK = 1e-9


@dataclass
class RankLog:
    """Audit trail of numeric rank decisions."""

    threshold: float = EPS_RANK
    decisions: list = field(default_factory=list)

    def record(self, rank: int, smallest_kept: float | None, largest_dropped: float | None):
        self.decisions.append(
            {"rank": rank, "smallest_kept": smallest_kept, "largest_dropped": largest_dropped}
        )

    def margin(self):
        kept = [d["smallest_kept"] for d in self.decisions if d["smallest_kept"] is not None]
        dropped = [d["largest_dropped"] for d in self.decisions if d["largest_dropped"] is not None]
        return (min(kept) if kept else None, max(dropped) if dropped else None)


def _coerce(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return complex(x)
    return complex(x)


class Matrix:
    """Immutable dense matrix, row-major."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        rs = tuple(tuple(_coerce(x) for x in r) for r in rows)
        nc = len(rs[0]) if rs else (ncols or 0)
        if any(len(r) != nc for r in rs):
            raise DimensionMismatch("ragged matrix")
        object.__setattr__(self, "rows", rs)
        object.__setattr__(self, "nrows", len(rs))
        object.__setattr__(self, "ncols", nc)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    def __reduce__(self):
        return (Matrix._raw, (self.rows, self.ncols))

    @classmethod
    def _raw(cls, rows, ncols):
        m = object.__new__(cls)
        object.__setattr__(m, "rows", tuple(tuple(r) for r in rows))
        object.__setattr__(m, "nrows", len(m.rows))
        object.__setattr__(m, "ncols", ncols)
        return m

    # constructors
    @classmethod
    def zeros(cls, n: int, k: int | None = None, exact: bool = True):
        k = n if k is None else k
        z = Fraction(0) if exact else 0j
        return cls._raw([[z] * k for _ in range(n)], k)

    @classmethod
    def identity(cls, n: int, exact: bool = True):
        one, z = (Fraction(1), Fraction(0)) if exact else (1 + 0j, 0j)
        return cls._raw([[one if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def scalar(cls, n: int, c):
        c = _coerce(c)
        z = c * 0
        return cls._raw([[c if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def diag(cls, entries: Sequence):
        entries = [_coerce(e) for e in entries]
        n = len(entries)
        z = entries[0] * 0 if entries else Fraction(0)
        return cls._raw([[entries[i] if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int):
        if not cols:
            return cls._raw([[] for _ in range(nrows)], 0)
        return cls._raw([[c[i] for c in cols] for i in range(nrows)], len(cols))

    @classmethod
    def blocks(cls, grid: Sequence[Sequence["Matrix"]]):
        rows = []
        for brow in grid:
            h = brow[0].nrows
            for i in range(h):
                r = []
                for b in brow:
                    r.extend(b.rows[i])
                rows.append(r)
        return cls._raw(rows, len(rows[0]) if rows else 0)

    @classmethod
    def jordan_block(cls, theta, size: int):
        theta = _coerce(theta)
        one = theta * 0 + 1
        z = theta * 0
        return cls._raw(
            [[theta if i == j else (one if j == i + 1 else z) for j in range(size)] for i in range(size)],
            size,
        )

    @staticmethod
    def direct_sum(*mats: "Matrix") -> "Matrix":
        n = sum(m.nrows for m in mats)
        k = sum(m.ncols for m in mats)
        exact = all(m.is_exact() for m in mats)
        z = Fraction(0) if exact else 0j
        rows = [[z] * k for _ in range(n)]
        r0 = c0 = 0
        for m in mats:
            for i in range(m.nrows):
                for j in range(m.ncols):
                    rows[r0 + i][c0 + j] = m.rows[i][j]
            r0 += m.nrows
            c0 += m.ncols
        return Matrix._raw(rows, k)

    # properties
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def is_square(self):
        return self.nrows == self.ncols

    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for r in self.rows for x in r)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.ncols)]

    def block(self, i: int, j: int, size: int) -> "Matrix":
        return Matrix._raw(
            [r[j * size:(j + 1) * size] for r in self.rows[i * size:(i + 1) * size]], size
        )

    def to_complex(self) -> "Matrix":
        return Matrix._raw([[complex(x) for x in r] for r in self.rows], self.ncols)

    def to_numpy(self):
        import numpy as np

        return np.array([[complex(x) for x in r] for r in self.rows], dtype=complex).reshape(
            self.nrows, self.ncols
        )

    @classmethod
    def from_numpy(cls, arr):
        return cls._raw([[complex(x) for x in r] for r in arr], arr.shape[1])

    # arithmetic
    def __add__(self, other: "Matrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return Matrix._raw(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols
        )

    def __sub__(self, other: "Matrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} - {other.shape}")
        return Matrix._raw(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols
        )

    def __neg__(self):
        return Matrix._raw([[-a for a in r] for r in self.rows], self.ncols)

    def scale(self, c) -> "Matrix":
        c = _coerce(c)
        return Matrix._raw([[c * a for a in r] for r in self.rows], self.ncols)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise DimensionMismatch(f"{self.shape} @ {other.shape}")
            cols = list(zip(*other.rows)) if other.nrows else [()] * other.ncols
            out = []
            for r in self.rows:
                nz = [(k, a) for k, a in enumerate(r) if a]
                row = []
                for c in cols:
                    acc = 0
                    for k, a in nz:
                        b = c[k]
                        if b:
                            acc += a * b
                    row.append(acc)
                out.append(row)
            zero = Fraction(0) if (self.is_exact() and other.is_exact()) else 0j
            return Matrix._raw([[x if x != 0 else zero for x in r] for r in out], other.ncols)
        # vector
        v = tuple(other)
        if len(v) != self.ncols:
            raise DimensionMismatch("matrix-vector size mismatch")
        return tuple(sum((a * b for a, b in zip(r, v) if a and b), start=r[0] * 0 if r else 0) for r in self.rows)

    def __pow__(self, n: int):
        out = Matrix.identity(self.nrows, exact=self.is_exact())
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    @property
    def T(self) -> "Matrix":
        return Matrix._raw([list(c) for c in zip(*self.rows)] if self.nrows else [], self.nrows)

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def is_zero(self, tol: float | None = None) -> bool:
        if tol is None and self.is_exact():
            return all(x == 0 for r in self.rows for x in r)
        tol = EPS_RANK if tol is None else tol
        return all(abs(x) <= tol for r in self.rows for x in r)

    def allclose(self, other: "Matrix", tol: float = 1e-9) -> bool:
        return self.shape == other.shape and (self - other).is_zero(tol)

    def add_scalar(self, c) -> "Matrix":
        """``self + c * 1``."""
        return self + Matrix.scalar(self.nrows, c)

    def __repr__(self):
        return f"Matrix({[[str(x) for x in r] for r in self.rows]})"


# ---------------------------------------------------------------------------
# elimination
# ---------------------------------------------------------------------------

def _tol_for(rows, tol):
    exact = all(isinstance(x, Fraction) for r in rows for x in r)
    if exact and tol is None:
        return None
    return EPS_RANK if tol is None else tol


def rref(rows: Sequence[Sequence], ncols: int, tol: float | None = None, log: RankLog | None = None):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    a = [list(r) for r in rows]
    tol = _tol_for(a, tol)
    pivots = []
    r = 0
    smallest_kept = None
    largest_dropped = None
    for c in range(ncols):
        if r >= len(a):
            break
        if tol is None:
            p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        else:
            best, p = 0.0, None
            for i in range(r, len(a)):
                v = abs(a[i][c])
                if v > best:
                    best, p = v, i
            if p is not None and best <= tol:
                largest_dropped = best if largest_dropped is None else max(largest_dropped, best)
                for i in range(r, len(a)):
                    a[i][c] = a[i][c] * 0
                p = None
            elif p is not None:
                smallest_kept = best if smallest_kept is None else min(smallest_kept, best)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        row = [x / piv for x in a[r]]
        a[r] = row
        for i in range(len(a)):
            if i != r:
                f = a[i][c]
                if f != 0:
                    ai = a[i]
                    for j in range(c, ncols):
                        if row[j] != 0:
                            ai[j] = ai[j] - f * row[j]
                    if tol is not None:
                        ai[c] = ai[c] * 0
        pivots.append(c)
        r += 1
    if log is not None and tol is not None:
        log.record(r, smallest_kept, largest_dropped)
    return a[:r], pivots


def rank(M: Matrix, tol: float | None = None, log: RankLog | None = None) -> int:
    return len(rref(M.rows, M.ncols, tol, log)[1])


def det(M: Matrix):
    if not M.is_square():
        raise DimensionMismatch("determinant of a non-square matrix")
    a = [list(r) for r in M.rows]
    n = M.nrows
    d = Fraction(1) if M.is_exact() else 1 + 0j
    for c in range(n):
        if M.is_exact():
            p = next((i for i in range(c, n) if a[i][c] != 0), None)
        else:
            p = max(range(c, n), key=lambda i: abs(a[i][c]))
            if a[p][c] == 0:
                p = None
        if p is None:
            return d * 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        piv = a[c][c]
        d *= piv
        for i in range(c + 1, n):
            f = a[i][c] / piv
            if f != 0:
                for j in range(c, n):
                    a[i][j] -= f * a[c][j]
    return d


def inverse(M: Matrix, tol: float | None = None) -> Matrix:
    n = M.nrows
    aug = [list(r) + list(e) for r, e in zip(M.rows, Matrix.identity(n, M.is_exact()).rows)]
    red, piv = rref(aug, 2 * n, tol)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return Matrix._raw([r[n:] for r in red], n)


def is_invertible(M: Matrix, tol: float | None = None) -> bool:
    return M.is_square() and rank(M, tol) == M.nrows


def poly_at_matrix(p: Poly, M: Matrix) -> Matrix:
    """``p(M)`` by Horner's rule."""
    acc = Matrix.zeros(M.nrows, M.ncols, M.is_exact())
    for c in reversed(p.coeffs):
        acc = (acc @ M).add_scalar(c)
    return acc


def charpoly(M: Matrix) -> Poly:
    """Characteristic polynomial ``det(x*1 - M)`` (exact, Hessenberg reduction)."""
    n = M.nrows
    a = [list(r) for r in M.rows]
    # reduce to upper Hessenberg form by similarity
    for c in range(n - 2):
        p = next((i for i in range(c + 1, n) if a[i][c] != 0), None)
        if p is None:
            continue
        if p != c + 1:
            a[c + 1], a[p] = a[p], a[c + 1]
            for row in a:
                row[c + 1], row[p] = row[p], row[c + 1]
        piv = a[c + 1][c]
        for i in range(c + 2, n):
            f = a[i][c] / piv
            if f != 0:
                for j in range(n):
                    a[i][j] -= f * a[c + 1][j]
                for row in a:
                    row[c + 1] += f * row[i]
    # recurrence on leading principal submatrices
    polys = [Poly.const(1)]
    x = Poly.x()
    for k in range(1, n + 1):
        pk = (x - a[k - 1][k - 1]) * polys[k - 1]
        prod = Fraction(1)
        for i in range(k - 1, 0, -1):
            prod *= a[i][i - 1]
            if prod == 0:
                break
            pk = pk - polys[i - 1] * (prod * a[i - 1][k - 1])
        polys.append(pk)
    return polys[n]


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

class Subspace:
    """Subspace of K^n stored by its canonical reduced echelon basis."""

    __slots__ = ("ambient_dim", "vectors", "pivots", "tol")

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence] = (), tol: float | None = None,
                 log: RankLog | None = None, _canonical: bool = False):
        vs = [tuple(_coerce(x) for x in v) for v in vectors]
        if any(len(v) != ambient_dim for v in vs):
            raise DimensionMismatch("vector outside ambient space")
        if _canonical:
            red, piv = vs, [next(i for i, x in enumerate(v) if x != 0) for v in vs]
        else:
            red, piv = rref(vs, ambient_dim, tol, log) if vs else ([], [])
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "vectors", tuple(tuple(v) for v in red))
        object.__setattr__(self, "pivots", tuple(piv))
        object.__setattr__(self, "tol", tol)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    def __reduce__(self):
        return (Subspace, (self.ambient_dim, self.vectors, self.tol, None, True))

    @classmethod
    def zero(cls, n: int):
        return cls(n, ())

    @classmethod
    def full(cls, n: int, exact: bool = True):
        return cls(n, Matrix.identity(n, exact).rows)

    @classmethod
    def span_columns(cls, M: Matrix, tol: float | None = None):
        return cls(M.nrows, M.columns(), tol)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def basis(self) -> Matrix:
        """Basis as the columns of an ``ambient_dim x dim`` matrix."""
        return Matrix.from_columns(self.vectors, self.ambient_dim)

    def reduce(self, v: Sequence) -> tuple:
        v = list(v)
        for b, p in zip(self.vectors, self.pivots):
            c = v[p]
            if c != 0:
                for j in range(p, self.ambient_dim):
                    if b[j] != 0:
                        v[j] = v[j] - c * b[j]
        return tuple(v)

    def contains(self, v: Sequence, tol: float | None = None) -> bool:
        r = self.reduce(v)
        t = tol if tol is not None else self.tol
        if t is None and all(isinstance(x, Fraction) for x in r):
            return all(x == 0 for x in r)
        t = EPS_RANK if t is None else t
        return all(abs(x) <= t for x in r)

    def issubset(self, other: "Subspace") -> bool:
        return all(other.contains(v) for v in self.vectors)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        if self.pivots != other.pivots:
            return False
        return self.issubset(other)

    def __hash__(self):
        return hash((self.ambient_dim, self.pivots))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def kernel(M: Matrix, tol: float | None = None, log: RankLog | None = None) -> Subspace:
    """Right null space ``{v : M v = 0}`` in canonical form."""
    n = M.ncols
    red, piv = rref(M.rows, n, tol, log)
    exact = M.is_exact() and tol is None
    one, zero = (Fraction(1), Fraction(0)) if exact else (1 + 0j, 0j)
    pivset = set(piv)
    vecs = []
    for f in range(n):
        if f in pivset:
            continue
        v = [zero] * n
        v[f] = one
        for r, p in zip(red, piv):
            v[p] = -r[f]
        vecs.append(v)
    return Subspace(n, vecs, tol)


def image(M: Matrix, tol: float | None = None) -> Subspace:
    return Subspace.span_columns(M, tol)


def _check_ambient(S: Subspace, T: Subspace):
    if S.ambient_dim != T.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions {S.ambient_dim} != {T.ambient_dim}")


def subspace_sum(S: Subspace, T: Subspace, tol: float | None = None) -> Subspace:
    _check_ambient(S, T)
    return Subspace(S.ambient_dim, S.vectors + T.vectors, tol if tol is not None else S.tol)


def subspace_intersection(S: Subspace, T: Subspace, tol: float | None = None) -> Subspace:
    _check_ambient(S, T)
    if S.dim == 0 or T.dim == 0:
        return Subspace.zero(S.ambient_dim)
    # v = S a lies in T iff its reduction modulo T vanishes
    red = [T.reduce(v) for v in S.vectors]
    R = Matrix.from_columns(red, S.ambient_dim)
    coeffs = kernel(R, tol)
    vecs = []
    for a in coeffs.vectors:
        v = [S.vectors[0][0] * 0] * S.ambient_dim
        for c, s in zip(a, S.vectors):
            if c != 0:
                v = [x + c * y for x, y in zip(v, s)]
        vecs.append(v)
    return Subspace(S.ambient_dim, vecs, tol)


def apply(M: Matrix, S: Subspace, tol: float | None = None) -> Subspace:
    """Image ``M(S)``."""
    return Subspace(M.nrows, [M @ v for v in S.vectors], tol)


def is_invariant(M: Matrix, S: Subspace, tol: float | None = None) -> bool:
    return all(S.contains(M @ v, tol) for v in S.vectors)


@dataclass(frozen=True)
class QuotientMap:
    """Coordinates on ``K^n / S`` via the non-pivot coordinates of ``S``'s echelon basis."""

    ambient_dim: int
    subspace: Subspace
    section: Matrix
    projection: Matrix

    @property
    def dim(self) -> int:
        return self.ambient_dim - self.subspace.dim


def quotient(ambient: int, S: Subspace) -> QuotientMap:
    if S.ambient_dim != ambient:
        raise DimensionMismatch("subspace lives in a different ambient space")
    exact = all(isinstance(x, Fraction) for v in S.vectors for x in v)
    one, zero = (Fraction(1), Fraction(0)) if exact else (1 + 0j, 0j)
    pivset = set(S.pivots)
    free = [i for i in range(ambient) if i not in pivset]
    section_cols = []
    for f in free:
        e = [zero] * ambient
        e[f] = one
        section_cols.append(e)
    section = Matrix.from_columns(section_cols, ambient) if free else Matrix._raw([[] for _ in range(ambient)], 0)
    proj_rows = []
    for f in free:
        row = [zero] * ambient
        row[f] = one
        for b, p in zip(S.vectors, S.pivots):
            if b[f] != 0:
                row[p] = row[p] - b[f]
        proj_rows.append(row)
    projection = Matrix._raw(proj_rows, ambient)
    return QuotientMap(ambient, S, section, projection)


def induced_operator(F: Matrix, Q: QuotientMap, tol: float | None = None) -> Matrix:
    """Matrix of the action of ``F`` on the quotient ``K^n / S``."""
    if not is_invariant(F, Q.subspace, tol):
        raise InvarianceViolation("operator does not preserve the subspace")
    if Q.dim == 0:
        return Matrix._raw([], 0)
    return Q.projection @ F @ Q.section


def preimage(M: Matrix, W: Subspace, tol: float | None = None) -> Subspace:
    """``M^{-1}(W)`` as the kernel of (projection mod W) ∘ M; no inversion."""
    Q = quotient(W.ambient_dim, W)
    if Q.dim == 0:
        return Subspace.full(M.ncols, M.is_exact() and tol is None)
    return kernel(Q.projection @ M, tol)


def largest_invariant_subspace_inside(M: Matrix, W: Subspace, tol: float | None = None) -> Subspace:
    """Largest ``M``-invariant subspace contained in ``W``."""
    cur = W
    for _ in range(W.ambient_dim + 1):
        nxt = subspace_intersection(cur, preimage(M, cur, tol), tol)
        if nxt.dim == cur.dim:
            return cur
        cur = nxt
    return cur


def generalized_kernel_dims(M: Matrix, theta, jmax: int, tol: float | None = None,
                            log: RankLog | None = None) -> list[int]:
    """``[dim ker (M - theta)^j for j = 1..jmax]``."""
    S = M.add_scalar(-_coerce(theta))
    out = []
    P = S
    for _ in range(jmax):
        out.append(M.ncols - rank(P, tol, log))
        P = P @ S
    return out


def centralizer_dimension(M: Matrix, tol: float | None = None) -> int:
    """Dimension of ``{X : M X = X M}`` via the commutation operator on vec(X)."""
    n = M.nrows
    zero = M.rows[0][0] * 0 if n else Fraction(0)
    rows = []
    # (M X - X M)[i][j] = sum_k M[i][k] X[k][j] - X[i][k] M[k][j]
    for i in range(n):
        for j in range(n):
            r = [zero] * (n * n)
            for k in range(n):
                r[k * n + j] += M.rows[i][k]
                r[i * n + k] -= M.rows[k][j]
            rows.append(r)
    return n * n - rank(Matrix._raw(rows, n * n), tol)


# ---------------------------------------------------------------------------
# polynomial matrices and Smith normal form
# ---------------------------------------------------------------------------

class PolyMat:
    """Rectangular matrix of exact polynomials."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable]):
        rs = tuple(tuple(e if isinstance(e, Poly) else Poly.const(e) for e in r) for r in rows)
        nc = len(rs[0]) if rs else 0
        if any(len(r) != nc for r in rs):
            raise DimensionMismatch("ragged polynomial matrix")
        object.__setattr__(self, "rows", rs)
        object.__setattr__(self, "nrows", len(rs))
        object.__setattr__(self, "ncols", nc)

    def __setattr__(self, name, value):
        raise AttributeError("PolyMat is immutable")

    def __reduce__(self):
        return (PolyMat, (self.rows,))

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Matrix]) -> "PolyMat":
        """``sum_k coeffs[k] x^k``."""
        n, k = coeffs[0].shape
        return cls(
            [[Poly([C.rows[i][j] for C in coeffs]) for j in range(k)] for i in range(n)]
        )

    @classmethod
    def x_minus(cls, M: Matrix) -> "PolyMat":
        """``x*1 - M``."""
        n = M.nrows
        return cls(
            [[Poly((-M.rows[i][j], 1 if i == j else 0)) for j in range(n)] for i in range(n)]
        )

    @property
    def degree(self) -> int:
        return max((e.degree for r in self.rows for e in r), default=-1)

    def coefficients(self) -> list[Matrix]:
        d = max(self.degree, 0)
        out = []
        for k in range(d + 1):
            out.append(Matrix(
                [[e.coeffs[k] if k < len(e.coeffs) else Fraction(0) for e in r] for r in self.rows]
            ))
        return out

    def evaluate(self, a) -> Matrix:
        return Matrix([[e(Fraction(a)) for e in r] for r in self.rows])

    def derivative(self) -> "PolyMat":
        return PolyMat([[e.derivative() for e in r] for r in self.rows])

    def map(self, f) -> "PolyMat":
        return PolyMat([[f(e) for e in r] for r in self.rows])

    def __matmul__(self, other: "PolyMat") -> "PolyMat":
        out = []
        for r in self.rows:
            row = []
            for j in range(other.ncols):
                acc = Poly()
                for k, a in enumerate(r):
                    if not a.is_zero():
                        acc = acc + a * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return PolyMat(out)

    def entry_gcd(self) -> Poly:
        from .algebra import poly_gcd

        g = Poly()
        for r in self.rows:
            for e in r:
                g = poly_gcd(g, e)
        return g

    def det(self) -> Poly:
        return _poly_det(self)

    def adjugate(self) -> "PolyMat":
        n = self.nrows
        if n == 1:
            return PolyMat([[Poly.const(1)]])
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = PolyMat(
                    [[self.rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
                )
                d = _poly_det(minor)
                out[j][i] = d if (i + j) % 2 == 0 else -d
        return PolyMat(out)

    def __eq__(self, other):
        return isinstance(other, PolyMat) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"PolyMat({[[str(e) for e in r] for r in self.rows]})"


def _int_det(a: list) -> int:
    # Bareiss elimination over the integers
    n = len(a)
    a = [list(r) for r in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _poly_det(M: PolyMat) -> Poly:
    """Determinant by evaluation at deg+1 integers and Newton interpolation.

    Rows are first scaled to integer coefficients so evaluation and elimination
    stay in Python ints.
    """
    n = M.nrows
    if n == 0:
        return Poly.const(1)
    scale = Fraction(1)
    rows = []
    for r in M.rows:
        den = 1
        for e in r:
            for c in e.coeffs:
                den = den * c.denominator // math.gcd(den, c.denominator)
        scale *= den
        rows.append([[int(c * den) for c in e.coeffs] for e in r])
    bound = sum(max((len(e) - 1 for e in r if e), default=0) for r in rows)

    def ev(cs, x):
        acc = 0
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    xs = list(range(bound + 1))
    coef = [Fraction(_int_det([[ev(e, x) for e in r] for r in rows])) for x in xs]
    for j in range(1, len(xs)):
        for i in range(len(xs) - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = Poly.const(coef[-1])
    for i in range(len(xs) - 2, -1, -1):
        out = out * Poly.linear_root(xs[i]) + Poly.const(coef[i])
    return Poly([c / scale for c in out.coeffs])


# integer-polynomial helpers for the Smith form (lists of ints, low degree first)

def _ip_strip(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _ip_content(a):
    g = 0
    for c in a:
        g = math.gcd(g, c)
    return g


def _ip_sub_scaled(a, b, ca, cb, shift):
    """``ca*a - cb*x^shift*b``."""
    n = max(len(a), len(b) + shift)
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = ca * c
    for i, c in enumerate(b):
        out[i + shift] -= cb * c
    return _ip_strip(out)


def _ip_pseudo_reduce(a, b):
    """Return (s, q, r) with ``s*a = q*b + r``, ``s`` a positive integer, deg r < deg b."""
    lb = b[-1]
    db = len(b) - 1
    r = a[:]
    s = 1
    q = [0] * max(len(a) - db, 1)
    while r and len(r) - 1 >= db:
        lr = r[-1]
        shift = len(r) - 1 - db
        g = math.gcd(lr, lb)
        mr, mb = lb // g, lr // g
        if mb < 0 and mr < 0:
            mr, mb = -mr, -mb
        if mr < 0:
            mr, mb = -mr, -mb
        # r <- mr*r - mb*x^shift*b
        r = _ip_sub_scaled(r, b, mr, mb, shift)
        q = [mr * c for c in q]
        q[shift] += mb
        s *= mr
    return s, _ip_strip(q), r


def _ip_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _row_normalize(row):
    g = 0
    for e in row:
        for c in e:
            g = math.gcd(g, c)
            if g == 1:
                return row
    if g > 1:
        return [[c // g for c in e] for e in row]
    return row


def _to_int_rows(M: PolyMat):
    rows = []
    for r in M.rows:
        den = 1
        for e in r:
            for c in e.coeffs:
                den = den * c.denominator // math.gcd(den, c.denominator)
        rows.append(_row_normalize([[int(c * den) for c in e.coeffs] for e in r]))
    return rows


def smith_normal_form(M: PolyMat) -> tuple[list[Poly], int]:
    """Invariant factors of ``M`` over Q[x].

    Returns ``(d, r)`` with ``d`` the monic invariant factors ordered largest
    first (``d[i+1] | d[i]``) and ``r`` the rank.  Works with primitive
    integer polynomials and fraction-free pseudo-division; rows and columns
    are rescaled by nonzero integers (units of Q[x]) to strip content.
    """
    a = _to_int_rows(M)
    n, k = M.nrows, M.ncols
    diag: list[list[int]] = []
    t = 0
    while t < min(n, k):
        # pivot of minimal degree
        best = None
        for i in range(t, n):
            for j in range(t, k):
                e = a[i][j]
                if e and (best is None or len(e) < best[0]):
                    best = (len(e), i, j)
                    if len(e) == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        while True:
            piv = a[t][t]
            dirty = False
            # clear column t below the pivot
            for i in range(t + 1, n):
                e = a[i][t]
                if not e:
                    continue
                s, q, r = _ip_pseudo_reduce(e, piv)
                row_t = a[t]
                new = []
                for j in range(k):
                    x = [s * c for c in a[i][j]] if s != 1 else a[i][j]
                    new.append(_ip_strip(_ip_sub_scaled(x, _ip_mul(q, row_t[j]), 1, 1, 0)))
                new[t] = r
                a[i] = _row_normalize(new)
                if r:
                    dirty = True
            # clear row t right of the pivot
            for j in range(t + 1, k):
                e = a[t][j]
                if not e:
                    continue
                s, q, r = _ip_pseudo_reduce(e, piv)
                for i in range(n):
                    x = [s * c for c in a[i][j]] if s != 1 else a[i][j]
                    a[i][j] = _ip_strip(_ip_sub_scaled(x, _ip_mul(q, a[i][t]), 1, 1, 0))
                a[t][j] = r
                if r:
                    dirty = True
            if dirty:
                # move a smaller-degree remainder into the pivot slot
                best = (len(a[t][t]), t, t)
                for i in range(t + 1, n):
                    if a[i][t] and len(a[i][t]) < best[0]:
                        best = (len(a[i][t]), i, t)
                for j in range(t + 1, k):
                    if a[t][j] and len(a[t][j]) < best[0]:
                        best = (len(a[t][j]), t, j)
                _, pi, pj = best
                a[t], a[pi] = a[pi], a[t]
                for row in a:
                    row[t], row[pj] = row[pj], row[t]
                continue
            # pivot must divide every remaining entry
            bad = None
            for i in range(t + 1, n):
                for j in range(t + 1, k):
                    e = a[i][j]
                    if e and _ip_pseudo_reduce(e, piv)[2]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            a[t] = [_ip_strip(_ip_sub_scaled(x, y, 1, -1, 0)) for x, y in zip(a[t], a[bad])]
        diag.append(a[t][t])
        t += 1
    factors = [Poly(Fraction(c) for c in d).monic() for d in diag]
    # ascending divisibility on the diagonal; report largest first
    return list(reversed(factors)), len(factors)


def invariant_factors_full(M: PolyMat) -> list[Poly]:
    """All ``min(rows, cols)`` invariant factors, largest first; zeros for rank deficiency."""
    d, r = smith_normal_form(M)
    return [Poly()] * (min(M.nrows, M.ncols) - r) + d

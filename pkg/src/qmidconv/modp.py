"""Linear algebra over F_p with numpy int64, plus CRT lifting back to the rationals.

Results computed here are only ever used as candidates: anything lifted to Q is
re-verified in exact arithmetic before it is trusted.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

# primes below 2**26 keep every dot product of length <= 2**11 inside int64
PRIMES = (67108859, 67108837, 67108819)


def reduce_matrix(rows: Sequence[Sequence], p: int) -> np.ndarray | None:
    """Entrywise reduction of a rational matrix, or None if p divides a denominator."""
    out = np.zeros((len(rows), len(rows[0]) if rows else 0), dtype=np.int64)
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            x = Fraction(x)
            if x.denominator % p == 0:
                return None
            out[i, j] = (x.numerator % p) * pow(x.denominator, -1, p) % p
    return out


class EchelonBasis:
    """Incrementally maintained reduced row echelon basis of vectors mod p."""

    def __init__(self, width: int, p: int):
        self.p = p
        self.width = width
        self.rows = np.zeros((0, width), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        v = v % self.p
        if self.pivots:
            v = (v - v[self.pivots] @ self.rows) % self.p
        return v

    def add(self, v: np.ndarray) -> bool:
        v = self.reduce(v)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        c = int(nz[0])
        v = v * pow(int(v[c]), -1, self.p) % self.p
        if self.pivots:
            col = self.rows[:, c].copy()
            self.rows = (self.rows - np.outer(col, v)) % self.p
        order = np.searchsorted(self.pivots, c)
        self.rows = np.insert(self.rows, order, v, axis=0)
        self.pivots.insert(int(order), c)
        return True


def rref(M: np.ndarray, p: int) -> EchelonBasis:
    E = EchelonBasis(M.shape[1], p)
    for r in M:
        E.add(r)
    return E


def nullspace(M: np.ndarray, p: int) -> np.ndarray:
    """Canonical (reduced echelon) basis of the right kernel, as rows."""
    n = M.shape[1]
    E = rref(M, p)
    free = [j for j in range(n) if j not in set(E.pivots)]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.int64)
        v[f] = 1
        for r, c in zip(E.rows, E.pivots):
            v[c] = (-r[f]) % p
        basis.append(v)
    if not basis:
        return np.zeros((0, n), dtype=np.int64)
    return rref(np.array(basis), p).rows


def algebra_basis(gens: Sequence[np.ndarray], p: int, limit: int | None = None) -> list[np.ndarray]:
    """Basis (as matrices) of the unital algebra generated by ``gens`` mod p."""
    n = gens[0].shape[0]
    limit = n * n if limit is None else limit
    E = EchelonBasis(n * n, p)
    basis = []
    frontier = [np.eye(n, dtype=np.int64)]
    while frontier and E.dim < limit:
        nxt = []
        for X in frontier:
            if E.add(X.reshape(-1)):
                basis.append(X)
                nxt.extend((X @ g) % p for g in gens)
        frontier = nxt
    return basis


def radical_image(basis: Sequence[np.ndarray], p: int) -> np.ndarray:
    """Echelon rows spanning the sum of images of the trace-form radical."""
    n = basis[0].shape[0]
    d = len(basis)
    G = np.zeros((d, d), dtype=np.int64)
    for i, a in enumerate(basis):
        for j in range(i, d):
            G[i, j] = G[j, i] = int(np.sum((a * basis[j].T) % p) % p)
    coeffs = nullspace(G, p)
    E = EchelonBasis(n, p)
    for c in coeffs:
        J = np.zeros((n, n), dtype=np.int64)
        for k, ck in enumerate(c):
            if ck:
                J = (J + int(ck) * basis[k]) % p
        for col in J.T:
            E.add(col)
    return E.rows


def commutant(gens: Sequence[np.ndarray], p: int) -> np.ndarray:
    """Basis rows (flattened row-major) of matrices commuting with every generator."""
    n = gens[0].shape[0]
    eye = np.eye(n, dtype=np.int64)
    blocks = [(np.kron(eye, g.T) - np.kron(g, eye)) % p for g in gens]
    return nullspace(np.vstack(blocks), p)


def _crt(a1: int, p1: int, a2: int, p2: int) -> int:
    t = (a2 - a1) * pow(p1, -1, p2) % p2
    return a1 + p1 * t


def rational_reconstruct(a: int, n: int) -> Fraction | None:
    """Rational x/y = a mod n with |x|, |y| <= sqrt(n/2), if one exists."""
    bound = int((n // 2) ** 0.5)
    r0, r1 = n, a % n
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def lift_rows(images: Sequence[np.ndarray], primes: Sequence[int]) -> list[list[Fraction]] | None:
    """Combine the same canonical object computed modulo several primes."""
    shapes = {r.shape for r in images}
    if len(shapes) != 1:
        return None
    acc, mod = images[0].astype(object), primes[0]
    for img, p in zip(images[1:], primes[1:]):
        acc = np.vectorize(lambda a, b: _crt(int(a), mod, int(b), p), otypes=[object])(acc, img)
        mod *= p
    out = []
    for row in acc:
        vals = [rational_reconstruct(int(x), mod) for x in row]
        if any(v is None for v in vals):
            return None
        out.append(vals)
    return out

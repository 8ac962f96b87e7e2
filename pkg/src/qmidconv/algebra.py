"""Exact scalars, univariate polynomials over Q and partition combinatorics.

Scalars of the exact backend are :class:`fractions.Fraction`; the numeric
backend uses Python ``complex``.  Polynomials are immutable coefficient
tuples, index = power of ``x``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[Fraction, complex]

DEFAULT_ABS_TOL = 1e-10


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def parse_scalar(token) -> Scalar:
    """Read ``"p/q"`` / ``"p"`` strings as Fractions and ``[re, im]`` pairs as complex."""
    if isinstance(token, str):
        return Fraction(token.strip())
    if isinstance(token, (list, tuple)) and len(token) == 2:
        re, im = float(token[0]), float(token[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError(f"non-finite complex scalar {token!r}")
        return complex(re, im)
    if isinstance(token, int) and not isinstance(token, bool):
        return Fraction(token)
    raise ValueError(f"cannot parse scalar {token!r}")


def format_scalar(x):
    if is_exact(x):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    z = complex(x)
    return [z.real, z.imag]


def close(a: complex, b: complex, tol: float = DEFAULT_ABS_TOL) -> bool:
    return abs(complex(a) - complex(b)) <= tol


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Immutable univariate polynomial with Fraction coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    def __reduce__(self):
        return (Poly, (self.coeffs,))

    # constructors
    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def linear_root(cls, r) -> "Poly":
        """The monic polynomial ``x - r``."""
        return cls((-Fraction(r), 1))

    @classmethod
    def from_roots(cls, roots: Iterable) -> "Poly":
        p = cls.const(1)
        for r in roots:
            p = p * cls.linear_root(r)
        return p

    # basic properties
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        lc = self.coeffs[-1]
        if lc == 1:
            return self
        return Poly(c / lc for c in self.coeffs)

    def valuation(self) -> int:
        """Order of vanishing at ``x = 0`` (``-1`` for the zero polynomial)."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return -1

    # arithmetic
    def __add__(self, other):
        other = _as_poly(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([a[i] + b[i] for i in range(len(b))] + list(a[len(b):]))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = Fraction(other)
            return Poly(c * a for a in self.coeffs)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree
        lc = other.lc
        if len(rem) - 1 < db:
            return Poly(), self
        quot = [Fraction(0)] * (len(rem) - db)
        bc = other.coeffs
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db] / lc
            quot[k] = c
            if c:
                for j in range(db + 1):
                    rem[k + j] -= c * bc[j]
        return Poly(quot), Poly(rem[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other) -> bool:
        if self.is_zero():
            return other.is_zero()
        return (other % self).is_zero()

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        try:
            return self.coeffs == Poly.const(other).coeffs
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        """Horner evaluation; works for any ring element supporting ``*`` and ``+``."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly(i * c for i, c in enumerate(self.coeffs) if i)

    def scale_argument(self, c) -> "Poly":
        """``p(c*x)``."""
        c = Fraction(c)
        return Poly(a * c ** i for i, a in enumerate(self.coeffs))

    def shift_valuation(self, v: int) -> "Poly":
        """Divide by ``x**v`` (``v`` must not exceed the valuation)."""
        if v and any(self.coeffs[:v]):
            raise ArithmeticError("x^v does not divide polynomial")
        return Poly(self.coeffs[v:])

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            cs = str(a)
            if i == 0:
                body = cs
            else:
                mono = "x" if i == 1 else f"x^{i}"
                body = mono if a == 1 else f"{cs}*{mono}"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _as_poly(p) -> Poly:
    return p if isinstance(p, Poly) else Poly.const(p)


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd; ``gcd(0, 0) = 0``."""
    a, b = _as_poly(p), _as_poly(q)
    while not b.is_zero():
        a, b = b, a % b
        if not b.is_zero():
            b = b.monic()
    return a.monic()


def poly_lcm(p: Poly, q: Poly) -> Poly:
    if p.is_zero() or q.is_zero():
        return Poly()
    return (p * q).exact_div(poly_gcd(p, q)).monic()


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: ``p = lc(p) * prod(e_j ** j)`` with monic, squarefree, coprime ``e_j``."""
    p = _as_poly(p)
    if p.is_zero():
        raise ValueError("squarefree decomposition of the zero polynomial")
    p = p.monic()
    out: list[tuple[Poly, int]] = []
    if p.is_constant():
        return out
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    d = c - b.derivative()
    i = 1
    while not b.is_constant():
        a = poly_gcd(b, d)
        if not a.is_constant():
            out.append((a, i))
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.derivative()
        i += 1
    return out


def squarefree_part(p: Poly) -> Poly:
    out = Poly.const(1)
    for e, _ in squarefree_decomposition(p):
        out = out * e
    return out


def multiplicity(p: Poly, e: Poly) -> int:
    """Largest ``k`` with ``e**k | p`` (``e`` non-constant, ``p`` nonzero)."""
    if e.is_constant():
        raise ValueError("multiplicity of a constant")
    k = 0
    q, r = divmod(p, e)
    while r.is_zero() and not p.is_zero():
        k += 1
        p = q
        q, r = divmod(p, e)
    return k


def coprime_basis(ps: Sequence[Poly]) -> list[Poly]:
    """Coarsest pairwise-coprime, squarefree, monic basis of the inputs.

    Every input factors as a product of powers of the basis elements, and
    two roots share a basis element iff they have the same multiplicity in
    every input.  The output is sorted by (degree, coefficients).
    """
    work: list[Poly] = []
    for p in ps:
        p = _as_poly(p)
        if p.is_zero():
            raise ValueError("coprime basis of the zero polynomial")
        for e, _ in squarefree_decomposition(p):
            work.append(e)
    # gcd refinement
    changed = True
    while changed:
        changed = False
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                g = poly_gcd(work[i], work[j])
                if g.is_constant():
                    continue
                a = work[i].exact_div(g).monic()
                b = work[j].exact_div(g).monic()
                rest = [w for k, w in enumerate(work) if k not in (i, j)]
                work = rest + [g] + [w for w in (a, b) if not w.is_constant()]
                changed = True
                break
            if changed:
                break
    # merge elements with identical exponent vectors
    groups: dict[tuple, Poly] = {}
    for e in work:
        key = tuple(multiplicity(_as_poly(p), e) for p in ps)
        groups[key] = groups[key] * e if key in groups else e
    return sorted((g.monic() for g in groups.values()), key=lambda g: (g.degree, g.coeffs))


# ---------------------------------------------------------------------------
# rational roots (exact, via Hensel lifting and rational reconstruction)
# ---------------------------------------------------------------------------

def _integer_primitive(p: Poly) -> list[int]:
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p.coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints]


def _eval_mod(cs: list[int], x: int, mod: int) -> int:
    acc = 0
    for c in reversed(cs):
        acc = (acc * x + c) % mod
    return acc


def _poly_mod_p(cs, p):
    out = [c % p for c in cs]
    while out and out[-1] == 0:
        out.pop()
    return out


def _gcd_mod_p(a, b, p):
    a, b = _poly_mod_p(a, p), _poly_mod_p(b, p)
    while b:
        inv = pow(b[-1], -1, p)
        r = a[:]
        while len(r) >= len(b) and r:
            c = r[-1] * inv % p
            shift = len(r) - len(b)
            for i, bc in enumerate(b):
                r[shift + i] = (r[shift + i] - c * bc) % p
            while r and r[-1] == 0:
                r.pop()
        a, b = b, r
    return a


def _primes():
    n = 101
    while True:
        if all(n % d for d in range(2, int(n ** 0.5) + 1)):
            yield n
        n += 2


def _rational_reconstruct(r: int, mod: int, bound: int):
    # find u/v = r mod `mod` with |u|, |v| <= bound
    r0, r1 = mod, r % mod
    s0, s1 = 0, 1
    while r1 > bound:
        qq = r0 // r1
        r0, r1 = r1, r0 - qq * r1
        s0, s1 = s1, s0 - qq * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def _squarefree_rational_roots(f: Poly) -> list[Fraction]:
    cs = _integer_primitive(f)
    roots: list[Fraction] = []
    if cs[0] == 0:
        roots.append(Fraction(0))
        k = next(i for i, c in enumerate(cs) if c)
        cs = cs[k:]
    if len(cs) <= 1:
        return roots
    if len(cs) == 2:
        roots.append(Fraction(-cs[0], cs[1]))
        return roots
    dcs = [i * c for i, c in enumerate(cs)][1:]
    for p in _primes():
        if cs[-1] % p == 0 or cs[0] % p == 0:
            continue
        g = _gcd_mod_p(cs, dcs, p)
        if len(g) > 1:
            continue
        break
    bound = max(abs(cs[0]), abs(cs[-1]))
    target = 2 * bound * bound + 1
    fpoly = Poly(cs)
    for r in range(p):
        if _eval_mod(cs, r, p) != 0:
            continue
        mod = p
        while mod < target:
            mod = mod * mod
            fr = _eval_mod(cs, r, mod)
            dfr = _eval_mod(dcs, r, mod)
            r = (r - fr * pow(dfr, -1, mod)) % mod
        cand = _rational_reconstruct(r, mod, bound)
        if cand is not None and fpoly(cand) == 0:
            roots.append(cand)
    return roots


def rational_roots(p: Poly) -> tuple[list[tuple[Fraction, int]], int]:
    """All rational roots of ``p`` with multiplicities, plus the degree left unsplit."""
    p = _as_poly(p)
    if p.is_zero():
        raise ValueError("rational roots of the zero polynomial")
    found: list[tuple[Fraction, int]] = []
    for e, mult in squarefree_decomposition(p):
        for r in _squarefree_rational_roots(e):
            found.append((r, mult))
    found.sort()
    unsplit = p.degree - sum(k for _, k in found)
    return found, unsplit


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def normalize_partition(parts: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted((int(p) for p in parts if p), reverse=True))
    if any(p < 0 for p in out):
        raise ValueError(f"negative part in partition {out}")
    return out


def conjugate_partition(t: Sequence[int]) -> tuple[int, ...]:
    """Transpose of the Young diagram."""
    t = normalize_partition(t)
    if not t:
        return ()
    return tuple(sum(1 for p in t if p > k) for k in range(t[0]))


def partitions(n: int, largest: int | None = None):
    """All partitions of ``n`` as weakly decreasing tuples."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest

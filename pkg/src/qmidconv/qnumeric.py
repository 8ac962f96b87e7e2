"""q-special functions, the Euler kernel and Jackson integrals (complex floating point)."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceWarning
from .linalg import Matrix
from .system import PartialFractionSystem


@dataclass(frozen=True)
class QContext:
    q: complex
    trunc_pos: int = 60
    trunc_neg: int = 60
    tol: float = 1e-16

    def __post_init__(self):
        object.__setattr__(self, "q", complex(self.q))
        if not 0 < abs(self.q) < 1:
            raise ValueError("need 0 < |q| < 1")
        if self.trunc_pos <= 0 or self.trunc_neg <= 0:
            raise ValueError("truncation bounds must be positive")

    def halved(self) -> "QContext":
        return QContext(self.q, max(1, self.trunc_pos // 2), max(1, self.trunc_neg // 2), self.tol)


@dataclass(frozen=True)
class LatticeFunction:
    """Samples ``n -> Y(q^n)`` on a contiguous exponent range."""

    samples: dict

    def __post_init__(self):
        ns = sorted(self.samples)
        if ns and ns != list(range(ns[0], ns[-1] + 1)):
            raise ValueError("lattice samples must cover a contiguous exponent range")

    @classmethod
    def from_callable(cls, f: Callable, ctx: QContext) -> "LatticeFunction":
        return cls({n: np.atleast_1d(np.asarray(f(ctx.q ** n), dtype=complex))
                    for n in range(-ctx.trunc_neg, ctx.trunc_pos + 1)})

    @property
    def range(self) -> tuple[int, int]:
        ns = sorted(self.samples)
        return ns[0], ns[-1]


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _poch_terms(a: complex, ctx: QContext):
    q = ctx.q
    aq = complex(a)
    bound = ctx.tol * (1 - abs(q))
    j = 0
    while True:
        yield 1 - aq
        j += 1
        if abs(aq) < bound and j > 1:
            return
        aq *= q
        if j > 100000:
            raise RuntimeError("q-Pochhammer product failed to converge")


def qpochhammer_inf(a: complex, ctx: QContext) -> complex:
    """(a;q)_inf as a truncated product."""
    out = 1 + 0j
    for t in _poch_terms(a, ctx):
        out *= t
    return out


def log_qpochhammer_inf(a: complex, ctx: QContext) -> complex:
    """A logarithm of (a;q)_inf (sum of principal logs of the factors)."""
    total = 0j
    for t in _poch_terms(a, ctx):
        if t == 0:
            raise ZeroDivisionError("q-Pochhammer product vanishes")
        total += cmath.log(t)
    return total


def theta(x: complex, ctx: QContext) -> complex:
    """prod_{n>=0} (1 - q^{n+1})(1 + x q^n)(1 + q^{n+1}/x)."""
    if x == 0:
        raise ValueError("theta is singular at 0")
    q = ctx.q
    x = complex(x)
    out = 1 + 0j
    qn = 1 + 0j
    bound = ctx.tol * (1 - abs(q))
    n = 0
    while True:
        out *= (1 - qn * q) * (1 + x * qn) * (1 + qn * q / x)
        qn *= q
        n += 1
        if abs(qn) * max(abs(x), 1 / abs(x), 1) < bound:
            return out
        if n > 100000:
            raise RuntimeError("theta product failed to converge")


def log_theta(x: complex, ctx: QContext) -> complex:
    """A logarithm of theta(x); large or small |x| is first moved near the unit circle."""
    if x == 0:
        raise ValueError("theta is singular at 0")
    q = ctx.q
    x = complex(x)
    # theta(q^k x) = theta(x) / (x^k q^{k(k-1)/2})
    k = int(math.floor(math.log(abs(x)) / -math.log(abs(q)))) if abs(x) > 1 or abs(x) < abs(q) else 0
    y = x * q ** k
    base = cmath.log(theta(y, ctx))
    # theta(y) = theta(x) / (x^k q^{k(k-1)/2})  =>  log theta(x) = log theta(y) + k log x + k(k-1)/2 log q
    return base + k * cmath.log(x) + k * (k - 1) / 2 * cmath.log(q)


def kernel_P(x: complex, s: complex, mu: complex, ctx: QContext) -> complex:
    """(mu q s/x; q)_inf / (q s/x; q)_inf."""
    num = qpochhammer_inf(mu * ctx.q * s / x, ctx)
    den = qpochhammer_inf(ctx.q * s / x, ctx)
    if den == 0 or abs(den) < 1e-300:
        raise ZeroDivisionError("s lies on a pole of the kernel")
    return num / den


def log_kernel_P(x: complex, s: complex, mu: complex, ctx: QContext) -> complex:
    return log_qpochhammer_inf(mu * ctx.q * s / x, ctx) - log_qpochhammer_inf(ctx.q * s / x, ctx)


# ---------------------------------------------------------------------------
# Jackson integral
# ---------------------------------------------------------------------------

@dataclass
class JacksonResult:
    value: np.ndarray
    tail_ratios: tuple
    tail_bounds: tuple
    converged: bool
    cancellation: float = 1.0


def _csum(vals: Sequence[complex]) -> complex:
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def jackson_terms(terms: dict, ctx: QContext, warn: bool = True) -> JacksonResult:
    """Sum precomputed terms ``n -> q^n f(q^n)`` and audit both tails."""
    ns = sorted(terms)
    width = len(np.atleast_1d(terms[ns[0]]))
    arr = {n: np.atleast_1d(np.asarray(terms[n], dtype=complex)) for n in ns}
    value = np.array([_csum([arr[n][k] for n in ns]) for k in range(width)]) * (1 - ctx.q)
    scale = max(np.linalg.norm(value), 1e-300)
    absolute = np.array([math.fsum(abs(arr[n][k]) for n in ns) for k in range(width)]) * abs(1 - ctx.q)
    cancellation = float(np.linalg.norm(value) / max(np.linalg.norm(absolute), 1e-300))

    def tail(a, b):
        na, nb = np.linalg.norm(arr[a]), np.linalg.norm(arr[b])
        if nb == 0:
            return (0.0 if na == 0 else math.inf), 0.0 if na == 0 else math.inf
        r = na / nb
        bound = math.inf if r >= 1 else na * r / (1 - r) * abs(1 - ctx.q) / scale
        return r, bound

    if len(ns) < 2:
        ratios, bounds = (math.nan, math.nan), (math.inf, math.inf)
    else:
        r_neg, t_neg = tail(ns[0], ns[1])
        r_pos, t_pos = tail(ns[-1], ns[-2])
        ratios, bounds = (float(r_neg), float(r_pos)), (float(t_neg), float(t_pos))
    converged = all(b < 1e-10 for b in bounds) and all(r < 1 for r in ratios)
    if warn and not converged:
        warnings.warn(f"Jackson integral tails do not decay: ratios {ratios[0]:.4g}, {ratios[1]:.4g}", DivergenceWarning,
                      stacklevel=2)
    return JacksonResult(value, ratios, bounds, converged, cancellation)


def jackson_integral(f: LatticeFunction, ctx: QContext) -> np.ndarray:
    """(1-q) sum_n q^n f(q^n) over the sampled range."""
    terms = {n: (ctx.q ** n) * v for n, v in f.samples.items()}
    if not terms:
        return np.zeros(1, dtype=complex)
    return jackson_terms(terms, ctx).value


# ---------------------------------------------------------------------------
# the scalar Euler-transform instance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarEulerInstance:
    """sigma Y = theta_g (1 - s/b')/(1 - s/b) Y, solved by theta(s)/theta(theta_g s) (s/b;q)/(s/b';q)."""

    q: complex = 0.5
    b: complex = 2.3
    b_prime: complex = 0.2
    theta_g: complex = 0.3
    mu: complex = 0.125
    x_points: tuple = (0.37 * 0.25, 0.37 * 0.5, 0.37)

    def system(self) -> PartialFractionSystem:
        th, b, bp = complex(self.theta_g), complex(self.b), complex(self.b_prime)
        return PartialFractionSystem(1, complex(self.q), (b,), (Matrix([[th * (1 - b / bp)]]),),
                                     Matrix([[th * b / bp]]), "euler-scalar")

    def log_Y(self, s: complex, ctx: QContext) -> complex:
        return (log_theta(s, ctx) - log_theta(self.theta_g * s, ctx)
                + log_qpochhammer_inf(s / self.b, ctx) - log_qpochhammer_inf(s / self.b_prime, ctx))

    def to_json(self) -> dict:
        def enc(z):
            z = complex(z)
            return z.real if z.imag == 0 else [z.real, z.imag]
        return {"q": enc(self.q), "b": enc(self.b), "b_prime": enc(self.b_prime),
                "theta": enc(self.theta_g), "mu": enc(self.mu), "x": [enc(x) for x in self.x_points]}


def euler_transform(E: PartialFractionSystem, log_Y: Callable, mu: complex, x: complex,
                    ctx: QContext, warn: bool = True) -> tuple[np.ndarray, JacksonResult]:
    """The vector (Y_0, ..., Y_N)(x) of Jackson integrals of P(x,s) Y(s)/(s - b_i), b_0 = 0."""
    q = ctx.q
    points = (0j,) + tuple(complex(b) for b in E.poles)
    terms = {}
    for n in range(-ctx.trunc_neg, ctx.trunc_pos + 1):
        s = q ** n
        base = cmath.exp(log_kernel_P(x, s, mu, ctx) + log_Y(s, ctx)) * s
        terms[n] = np.array([base / (s - b) for b in points])
    res = jackson_terms(terms, ctx, warn=warn)
    return res.value, res


def euler_transform_check(E: PartialFractionSystem | None = None, mu: complex | None = None,
                          ctx: QContext | None = None, instance: ScalarEulerInstance | None = None,
                          tol: float = 1e-6, min_cancellation: float = 1e-8) -> dict:
    """Residual of sigma_x Yhat = F(x) Yhat for the convolved scalar system.

    A transform that cancels to rounding level (``|sum| / sum|terms|`` below
    ``min_cancellation``) is reported as degenerate: its relative residual means nothing.
    """
    from .convolution import q_convolution

    inst = instance or ScalarEulerInstance()
    ctx = ctx or QContext(inst.q)
    E = E or inst.system()
    if E.m != 1:
        raise ValueError("the closed-form check needs a scalar system")
    mu = complex(inst.mu if mu is None else mu)
    F = q_convolution(E.to_complex(), mu).system
    residuals, stability, diverged = [], [], False
    tails, cancellation = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DivergenceWarning)
        for x in inst.x_points:
            x = complex(x)
            Yx, r1 = euler_transform(E, inst.log_Y, mu, x, ctx)
            Yqx, r2 = euler_transform(E, inst.log_Y, mu, ctx.q * x, ctx)
            half = ctx.halved()
            Yx_half, _ = euler_transform(E, inst.log_Y, mu, x, half, warn=False)
            Fx = F.evaluate(x).to_numpy()
            res = np.linalg.norm(Yqx - Fx @ Yx) / np.linalg.norm(Yx)
            residuals.append(float(res))
            stability.append(float(np.linalg.norm(Yx - Yx_half) / np.linalg.norm(Yx)))
            tails.append([r1.tail_ratios, r2.tail_ratios])
            cancellation.append(min(r1.cancellation, r2.cancellation))
        for w in caught:
            if issubclass(w.category, DivergenceWarning):
                diverged = True
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    degenerate = any(c < min_cancellation for c in cancellation)
    ok = (not diverged and not degenerate and all(r < tol for r in residuals)
          and all(s < tol for s in stability))
    return {
        "instance": inst.to_json(),
        "truncation": [-ctx.trunc_neg, ctx.trunc_pos],
        "tail_ratios": tails,
        "residuals": dict(zip((str(complex(x)) for x in inst.x_points), residuals)),
        "halving_stability": stability,
        "diverged": diverged,
        "cancellation": cancellation,
        "degenerate": degenerate,
        "verdict": "pass" if ok else "fail",
    }

"""Star exponentials Exp(-f sigma) and their hbar corrections.

Two independent constructions are provided:

* :func:`star_exp_sigma_series` sums ``(-sigma)^n f^{*n} / n!`` and
  :func:`hbar_corrections_from_series` regroups it by powers of hbar;
* :func:`gcal_recursion` integrates the sigma-ODE for the correction
  functions ``G_n`` defined by ``Exp(-f sigma) = e^{-f sigma} sum_n hbar^n G_n``.

Everything stays polynomial: derivatives of ``e^{-f sigma} X`` are rewritten as
``e^{-f sigma} (dX - sigma (df) X)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from gmpy2 import mpq

from .phasepoly import (
    EXACT,
    PhasePolynomial,
    StarContext,
    omega2_tilde,
    omega_k,
    star_product,
)
from .potentials import PotentialSpec

__all__ = [
    "SigmaSeries",
    "HbarCorrectionSet",
    "star_exp_sigma_series",
    "hbar_corrections_from_series",
    "gcal_recursion",
    "gcal_recursion_f",
    "f2_g2_truncated",
    "eps2_general",
    "eps2_potential",
    "gcal2_closed",
    "gcal4",
    "generic_gcal",
    "gcal_numeric",
    "MAX_SERIES_ORDER",
]

MAX_SERIES_ORDER = 40
_I_POW = ((1, 0), (0, 1), (-1, 0), (0, -1))


class SigmaSeries:
    """Truncated power series in sigma with PhasePolynomial coefficients.

    ``coefficients[n]`` multiplies ``sigma**n``; the list always has ``order + 1``
    entries and terms beyond ``sigma**order`` are dropped by every operation.
    """

    __slots__ = ("coefficients", "order")

    def __init__(self, coefficients: Sequence[PhasePolynomial], order: int | None = None):
        coeffs = list(coefficients)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("series order must be nonnegative")
        coeffs = coeffs[: order + 1]
        coeffs += [PhasePolynomial()] * (order + 1 - len(coeffs))
        self.coefficients = tuple(coeffs)
        self.order = order

    @classmethod
    def zero(cls, order: int) -> "SigmaSeries":
        return cls([], order)

    @classmethod
    def constant(cls, poly: PhasePolynomial, order: int) -> "SigmaSeries":
        return cls([poly], order)

    def __getitem__(self, n: int) -> PhasePolynomial:
        return self.coefficients[n]

    def __len__(self) -> int:
        return self.order + 1

    def __iter__(self):
        return iter(self.coefficients)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SigmaSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return self.coefficients[: n + 1] == other.coefficients[: n + 1]

    def __repr__(self) -> str:
        body = ", ".join(f"s^{n}: {c}" for n, c in enumerate(self.coefficients) if c)
        return f"SigmaSeries(order={self.order}, {{{body}}})"

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients)

    def sigma_degree(self) -> int:
        """Highest sigma power with a nonzero coefficient (-1 if zero)."""
        return max((n for n, c in enumerate(self.coefficients) if c), default=-1)

    def _binary(self, other: "SigmaSeries", op) -> "SigmaSeries":
        n = min(self.order, other.order)
        return SigmaSeries([op(a, b) for a, b in zip(self.coefficients[: n + 1], other.coefficients[: n + 1])], n)

    def __add__(self, other: "SigmaSeries") -> "SigmaSeries":
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other: "SigmaSeries") -> "SigmaSeries":
        return self._binary(other, lambda a, b: a - b)

    def __neg__(self) -> "SigmaSeries":
        return SigmaSeries([-c for c in self.coefficients], self.order)

    def scale(self, c) -> "SigmaSeries":
        return SigmaSeries([x.scale(c) for x in self.coefficients], self.order)

    def mul_poly(self, poly: PhasePolynomial) -> "SigmaSeries":
        return SigmaSeries([x * poly if x else x for x in self.coefficients], self.order)

    def __mul__(self, other: "SigmaSeries") -> "SigmaSeries":
        n = min(self.order, other.order)
        out = [PhasePolynomial() for _ in range(n + 1)]
        for i, a in enumerate(self.coefficients[: n + 1]):
            if not a:
                continue
            for j, b in enumerate(other.coefficients[: n + 1 - i]):
                if b:
                    out[i + j] = out[i + j] + a * b
        return SigmaSeries(out, n)

    def times_sigma(self) -> "SigmaSeries":
        return SigmaSeries([PhasePolynomial(), *self.coefficients[:-1]], self.order)

    def diff(self, variable: str, order: int = 1) -> "SigmaSeries":
        return SigmaSeries([c.diff(variable, order) for c in self.coefficients], self.order)

    def integrate_sigma(self) -> "SigmaSeries":
        """Antiderivative in sigma vanishing at sigma = 0."""
        out = [PhasePolynomial()]
        for n, c in enumerate(self.coefficients[:-1]):
            out.append(c.scale(mpq(1, n + 1)))
        return SigmaSeries(out, self.order)

    def derivative_sigma(self) -> "SigmaSeries":
        return SigmaSeries([c.scale(n) for n, c in enumerate(self.coefficients) if n], self.order)

    def hbar_part(self, k: int) -> "SigmaSeries":
        return SigmaSeries([c.hbar_part(k) for c in self.coefficients], self.order)

    def evaluate(self, q, p, sigma, hbar=1.0):
        total = 0.0
        for n, c in enumerate(self.coefficients):
            if c:
                total = total + c.evaluate(q, p, hbar) * sigma**n
        return total

    def to_text(self) -> str:
        parts = [f"[{c}] σ^{n}" for n, c in enumerate(self.coefficients) if c]
        return " + ".join(parts) if parts else "0"


def _exp_series(f: PhasePolynomial, order: int, sign: int = 1) -> SigmaSeries:
    """e^{sign f sigma} as a sigma-series with pointwise powers of f."""
    coeffs = [PhasePolynomial.constant(1)]
    power = PhasePolynomial.constant(1)
    for n in range(1, order + 1):
        power = power * f
        coeffs.append(power.scale(mpq(sign**n, math.factorial(n))))
    return SigmaSeries(coeffs, order)


def star_exp_sigma_series(f: PhasePolynomial, N: int, ctx: StarContext = EXACT) -> SigmaSeries:
    """Exp(-f sigma) = sum_n (-sigma)^n f^{*n} / n!, truncated at sigma^N."""
    if f.hbar_degree() > 0:
        raise ValueError("f must be hbar-independent")
    if not 1 <= N <= MAX_SERIES_ORDER:
        raise ValueError(f"series order N must lie in [1, {MAX_SERIES_ORDER}]")
    coeffs = [PhasePolynomial.constant(1)]
    power = PhasePolynomial.constant(1)
    for n in range(1, N + 1):
        power = star_product(f, power, ctx)
        coeffs.append(power.scale(mpq((-1) ** n, math.factorial(n))))
    return SigmaSeries(coeffs, N)


@dataclass
class HbarCorrectionSet:
    """Correction series ``G_n`` with ``Exp(-f sigma) = e^{-f sigma} sum_n hbar^n G_n``."""

    f: PhasePolynomial
    corrections: dict[int, SigmaSeries]
    order: int
    source: str = field(default="")

    def gcal(self, n: int) -> SigmaSeries:
        return self.corrections[n]

    def __getitem__(self, n: int) -> SigmaSeries:
        return self.corrections[n]

    def eps(self, n: int, q, p, sigma):
        """Pointwise value of E_n = e^{-f sigma} G_n at (q, p, sigma)."""
        return np.exp(-self.f.evaluate(q, p) * sigma) * self.corrections[n].evaluate(q, p, sigma)

    def star_exp(self, q, p, sigma, hbar=1.0, max_order: int | None = None):
        """Truncated hbar-expansion of Exp(-f sigma) at a point."""
        total = 0.0
        for n, g in sorted(self.corrections.items()):
            if max_order is not None and n > max_order:
                break
            total = total + hbar**n * g.evaluate(q, p, sigma)
        return np.exp(-self.f.evaluate(q, p) * sigma) * total


def hbar_corrections_from_series(f: PhasePolynomial, N_sigma: int, max_hbar: int,
                                 ctx: StarContext | None = None) -> HbarCorrectionSet:
    """Regroup the star-exponential series by hbar-degree and strip e^{-f sigma}."""
    if ctx is None:
        ctx = StarContext(hbar_truncation=max_hbar)
    series = star_exp_sigma_series(f, N_sigma, ctx)
    undo = _exp_series(f, N_sigma, sign=1)
    out = {m: undo * series.hbar_part(m) for m in range(max_hbar + 1)}
    return HbarCorrectionSet(f, out, N_sigma, source="series")


def _f_derivative_table(f: PhasePolynomial, kmax: int) -> dict:
    return {(a, b): f.diff("q", a).diff("p", b) for a in range(kmax + 1) for b in range(kmax + 1 - a)}


def gcal_recursion_f(f: PhasePolynomial, n_max: int, N_sigma: int) -> HbarCorrectionSet:
    """Integrate dG_n/dsigma = -sum_k i^k/(2^k k!) e^{f s} omega_k(f, e^{-f s} G_{n-k}).

    ``G_n(sigma = 0) = 0`` for n >= 1 and ``G_0 = 1``; valid for any
    hbar-independent polynomial f.
    """
    if f.hbar_degree() > 0:
        raise ValueError("f must be hbar-independent")
    dtab = _f_derivative_table(f, max(n_max, 1))
    fq, fp = dtab[(1, 0)], dtab[(0, 1)]

    def d_q(x: SigmaSeries) -> SigmaSeries:
        return x.diff("q") - x.times_sigma().mul_poly(fq)

    def d_p(x: SigmaSeries) -> SigmaSeries:
        return x.diff("p") - x.times_sigma().mul_poly(fp)

    def twisted_omega(k: int, x: SigmaSeries) -> SigmaSeries:
        out = SigmaSeries.zero(N_sigma)
        p_chain = [x]
        for _ in range(k):
            p_chain.append(d_p(p_chain[-1]))
        for j in range(k + 1):
            df = dtab[(k - j, j)]
            if not df:
                continue
            y = p_chain[k - j]
            for _ in range(j):
                y = d_q(y)
            out = out + y.mul_poly(df).scale(math.comb(k, j) * (-1) ** j)
        return out

    gs: dict[int, SigmaSeries] = {0: SigmaSeries.constant(PhasePolynomial.constant(1), N_sigma)}
    for n in range(1, n_max + 1):
        rhs = SigmaSeries.zero(N_sigma)
        for k in range(1, n + 1):
            prev = gs[n - k]
            if prev.is_zero():
                continue
            w = twisted_omega(k, prev)
            re_, im_ = _I_POW[k % 4]
            c = mpq(1, 2**k * math.factorial(k))
            rhs = rhs - w.scale((re_ * c, im_ * c))
        gs[n] = rhs.integrate_sigma()
    return HbarCorrectionSet(f, gs, N_sigma, source="recursion")


def gcal_recursion(alpha, v: PotentialSpec, n_max: int, N_sigma: int) -> HbarCorrectionSet:
    """Correction series for f = alpha p^2 + v(q) with polynomial v."""
    if not v.is_polynomial:
        raise TypeError("gcal_recursion needs a polynomial potential; use gcal_numeric")
    f = PhasePolynomial.monomial(0, 2, 0, Fraction(alpha)) + v.to_phasepoly()
    return gcal_recursion_f(f, n_max, N_sigma)


def f2_g2_truncated(f_value: float, N: int) -> tuple[float, float]:
    """Partial sums (n = 2..N) of the double-sum definitions of F2 and G2."""
    if N < 2:
        raise ValueError("N must be >= 2")
    F_terms, G_terms = [], []
    for n in range(2, N + 1):
        inv = 1.0 / math.factorial(n)
        a = sum(n - 1 - k for k in range(n - 1))
        b = sum((n - 1 - k) * (n - 2 - k) for k in range(n - 1))
        F_terms.append(inv * a * f_value ** (n - 2))
        if b:
            G_terms.append(inv * b * f_value ** (n - 3))
    return math.fsum(F_terms), math.fsum(G_terms)


def eps2_general(f: PhasePolynomial) -> Callable:
    """hbar^2 coefficient of Exp(f) as a pointwise evaluator ``(q, p) -> value``.

    Uses E2 = -(1/8) (omega_2(f,f) F2(f) + omega2_tilde(f,f) G2(f)) with the
    summed forms F2 = e^f / 2 and G2 = e^f / 3.
    """
    if f.hbar_degree() > 0:
        raise ValueError("f must be hbar-independent")
    w2 = omega_k(f, f, 2)
    wt = omega2_tilde(f)

    def evaluate(q, p):
        ef = np.exp(f.evaluate(q, p))
        return -0.125 * (w2.evaluate(q, p) * ef / 2 + wt.evaluate(q, p) * ef / 3)

    return evaluate


def gcal2_closed(alpha, v: PotentialSpec, q, p, sigma):
    """G_2 = -(a/4) s^2 v'' + (a^2/6) s^3 p^2 v'' + (a/12) s^3 v'^2."""
    a = float(alpha)
    v1 = v.derivative(1, q)
    v2 = v.derivative(2, q)
    return -a / 4 * sigma**2 * v2 + a * a / 6 * sigma**3 * p**2 * v2 + a / 12 * sigma**3 * v1**2


def eps2_potential(v: PotentialSpec, sigma, q, p, hbar=1.0):
    """hbar^2 E_2 for Exp(-(alpha p^2 + v) sigma), E_2 = e^{-H sigma} G_2."""
    v.check_domain(q)
    a = float(v.alpha)
    h = a * p**2 + v(q)
    return hbar**2 * np.exp(-h * sigma) * gcal2_closed(a, v, q, p, sigma)


# -- generic-potential symbolic route ------------------------------------

ALPHA, P, SIGMA = sp.symbols("alpha p sigma")
VDER = sp.symbols("v0:9")  # v0 = v, v1 = v', ...


def _sym_dq(expr):
    out = 0
    for k in range(len(VDER) - 1):
        if expr.has(VDER[k]):
            out += sp.diff(expr, VDER[k]) * VDER[k + 1]
    return out


@lru_cache(maxsize=None)
def generic_gcal(n: int) -> sp.Expr:
    """G_n for f = alpha p^2 + v(q), as a polynomial in alpha, p, sigma and v-derivatives.

    Symbols: ``alpha, p, sigma`` and ``v1, v2, ...`` for v', v'', ....
    """
    if n == 0:
        return sp.Integer(1)

    def f_d(a, b):
        if a and b:
            return 0
        if b == 0:
            return VDER[a]
        return {1: 2 * ALPHA * P, 2: 2 * ALPHA}.get(b, 0)

    def d_q(x):
        return sp.expand(_sym_dq(x) - SIGMA * VDER[1] * x)

    def d_p(x):
        return sp.expand(sp.diff(x, P) - 2 * ALPHA * SIGMA * P * x)

    rhs = 0
    for k in range(1, n + 1):
        prev = generic_gcal(n - k)
        if prev == 0:
            continue
        chain = [prev]
        for _ in range(k):
            chain.append(d_p(chain[-1]))
        w = 0
        for j in range(k + 1):
            df = f_d(k - j, j)
            if df == 0:
                continue
            y = chain[k - j]
            for _ in range(j):
                y = d_q(y)
            w += math.comb(k, j) * (-1) ** j * df * y
        rhs -= sp.I**k / (2**k * math.factorial(k)) * w
    rhs = sp.expand(rhs)
    return sp.expand(sp.integrate(rhs, (SIGMA, 0, SIGMA)))


@lru_cache(maxsize=None)
def _generic_gcal_fn(n: int):
    return sp.lambdify((ALPHA, P, SIGMA, *VDER[1:5]), generic_gcal(n), "numpy")


def gcal_numeric(v: PotentialSpec, n: int, q, p, sigma):
    """Evaluate G_n (n <= 4) for any potential family via analytic derivatives."""
    if n > 4:
        raise ValueError("numeric G_n evaluation is wired for n <= 4")
    v.check_domain(q)
    ders = [v.derivative(k, q) for k in range(1, 5)]
    out = _generic_gcal_fn(n)(float(v.alpha), p, sigma, *ders)
    return np.real_if_close(out) * np.ones(np.broadcast(np.asarray(q), np.asarray(p), np.asarray(sigma)).shape)


@dataclass
class Gcal4Result:
    series: SigmaSeries
    comparison: dict


def gcal4(v: PotentialSpec, N_sigma: int) -> Gcal4Result:
    """Recursion output G_4 for polynomial v, with a term-by-term check of the printed form."""
    from .ledger import compare_gcal4

    corr = gcal_recursion(v.alpha, v, 4, N_sigma)
    return Gcal4Result(corr[4], compare_gcal4())

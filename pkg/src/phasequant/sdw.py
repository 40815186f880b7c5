"""Heat-trace densities, Schwinger-DeWitt coefficients and zeta functions.

Everything here starts from the phase-space heat symbol
``Exp(-H sigma) = e^{-H sigma} (1 + hbar^2 G_2 + hbar^4 G_4 + ...)`` and
integrates out the momentum with exact moment formulas.

Normalization tags:

``standard``
    traces carry the 1/(2 pi hbar) of the Weyl correspondence, so that
    a_0 = (4 pi alpha)^{-1/2} at hbar = 1.
``paper``
    the bare phase-space integral, 2 pi hbar times larger
    (a_0 = sqrt(pi/alpha) = sqrt(2 pi m)).
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
from scipy import integrate, optimize, special

from .phasepoly import PhasePolynomial
from .potentials import PotentialSpec
from .starexp import ALPHA, P, SIGMA, VDER, HbarCorrectionSet, SigmaSeries, _exp_series, generic_gcal

__all__ = [
    "NORMALIZATIONS",
    "MomentumProfile",
    "SdwExpansion",
    "ZetaEvaluation",
    "QuadratureSpec",
    "FitResult",
    "normalization_factor",
    "momentum_moment",
    "integrate_out_momentum",
    "profile_expr",
    "sdw_coefficients",
    "sdw_from_profile",
    "delta2_coefficients",
    "heat_trace_phase_space",
    "phase_space_trace_asymptotics",
    "zeta_mellin",
    "zeta_direct_sum",
    "derivative_asymptotics",
    "green_from_sigma_integral",
    "fit_leading_power",
]

NORMALIZATIONS = ("standard", "paper")


def normalization_factor(normalization: str, hbar: float = 1.0) -> float:
    """Multiplier applied to bare phase-space integrals."""
    if normalization == "standard":
        return 1.0 / (2 * math.pi * hbar)
    if normalization == "paper":
        return 1.0
    raise ValueError(f"unknown normalization {normalization!r}")


def momentum_moment(k: int, alpha: float, sigma: float, gamma: float = 2.0) -> float:
    """int p^{2k} exp(-alpha sigma |p|^gamma) dp = (2/gamma) Gamma((2k+1)/gamma) (alpha sigma)^{-(2k+1)/gamma}."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    e = (2 * k + 1) / gamma
    return 2.0 / gamma * math.gamma(e) * (alpha * sigma) ** (-e)


# -- exact momentum integration of correction series -------------------------

@dataclass
class MomentumProfile:
    """int dp e^{-alpha sigma p^gamma} X(q, p; sigma) for a sigma-series X.

    ``terms`` maps the sigma exponent (a Fraction) to a list of
    ``(k, poly)`` pairs: the p^{2k} moment weight times the q-polynomial.
    The potential factor e^{-v sigma} is kept separate (``damped``).
    """

    alpha: Fraction
    gamma: Fraction
    terms: dict
    damped: bool = True

    def weight(self, k: int) -> float:
        g = float(self.gamma)
        e = (2 * k + 1) / g
        return 2.0 / g * math.gamma(e) * float(self.alpha) ** (-e)

    def collect(self) -> dict:
        """For gamma = 2: {offset: poly} with profile = sqrt(pi/alpha) sum_offset sigma^{offset - 1/2} poly."""
        if self.gamma != 2:
            raise ValueError("exact collection needs gamma = 2")
        out: dict[int, PhasePolynomial] = {}
        for power, items in self.terms.items():
            off = int(power + Fraction(1, 2))
            acc = out.get(off, PhasePolynomial())
            for k, poly in items:
                # Gamma(k + 1/2) / Gamma(1/2) = (2k-1)!! / 2^k
                ratio = Fraction(math.prod(range(1, 2 * k, 2)), 2**k) / self.alpha**k
                acc = acc + poly.scale(ratio)
            if acc:
                out[off] = acc
        return dict(sorted(out.items()))

    def powers(self) -> list[Fraction]:
        return sorted(self.terms)

    def evaluate(self, q, sigma, v: PotentialSpec | None = None):
        """Numeric value, including e^{-v sigma} when a potential is supplied."""
        total = 0.0
        for power, items in self.terms.items():
            for k, poly in items:
                total = total + self.weight(k) * poly.evaluate(q, 0.0) * sigma ** float(power)
        if self.damped and v is not None:
            total = total * np.exp(-np.asarray(v(q)) * sigma)
        return total


def integrate_out_momentum(series, alpha, gamma=2) -> MomentumProfile:
    """Integrate a correction series against e^{-alpha sigma p^gamma} over p.

    Accepts a :class:`SigmaSeries` or an :class:`HbarCorrectionSet` (whose
    hbar^2 correction is used).  Each term sigma^m p^{2k} q^i becomes
    q^i times the 2k-th moment, proportional to sigma^{m - (2k+1)/gamma}.
    Odd momentum powers would integrate to zero; they are rejected rather
    than dropped since they signal a wrong input.
    """
    if isinstance(series, HbarCorrectionSet):
        series = series[2]
    gamma = Fraction(gamma)
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    alpha = Fraction(alpha)
    terms: dict[Fraction, list] = {}
    for m, coeff in enumerate(series):
        by_k: dict[int, dict] = {}
        for (i, j, kh), c in coeff.items():
            if kh:
                raise ValueError("series coefficients must be hbar-free")
            if j % 2:
                raise ValueError(f"odd momentum power p^{j} at sigma^{m}")
            by_k.setdefault(j // 2, {})[(i, 0, 0)] = c
        for k, tmap in by_k.items():
            power = m - Fraction(2 * k + 1) / gamma
            terms.setdefault(power, []).append((k, PhasePolynomial(tmap)))
    return MomentumProfile(alpha, gamma, dict(sorted(terms.items())))


# -- generic-potential symbolic route ----------------------------------------

@lru_cache(maxsize=None)
def profile_expr(n: int) -> sp.Expr:
    """E_n(q; sigma): int dp e^{-alpha sigma p^2} G_n / sqrt(pi / (alpha sigma)).

    A polynomial in sigma, alpha and the v-derivative symbols ``v1..v4``.
    """
    g = sp.Poly(generic_gcal(n), P)
    out = 0
    for (deg,), c in g.terms():
        if deg % 2:
            raise ValueError("odd momentum power in generic correction")
        k = deg // 2
        out += c * sp.Integer(math.prod(range(1, 2 * k, 2))) / (2 * ALPHA * SIGMA) ** k
    return sp.expand(out)


@lru_cache(maxsize=None)
def _sdw_expr(n: int, hbar_order: int) -> sp.Expr:
    """Coefficient of sigma^n in e^{-v sigma} E_{hbar_order}(sigma), without the sqrt(pi/alpha)."""
    if n < 0:
        return sp.Integer(0)
    prof = sp.Poly(profile_expr(hbar_order), SIGMA)
    out = 0
    for (deg,), c in prof.terms():
        i = n - deg
        if i >= 0:
            out += c * (-VDER[0]) ** i / sp.factorial(i)
    return sp.expand(out)


@dataclass
class SdwExpansion:
    """Diagonal heat-kernel coefficients: sum_n (a_n + hbar^2 d2a_n) sigma^{n - 1/2}.

    ``a_expr`` and ``delta2_expr`` are exact sympy expressions in ``alpha``
    and the derivative symbols ``v0`` (= v), ``v1``, ...; they include the
    normalization prefactor.
    """

    alpha: Fraction
    potential: PotentialSpec
    n_max: int
    hbar_order: int
    normalization: str
    hbar: float
    a_expr: list
    delta2_expr: list
    sigma_power_offset: Fraction = Fraction(-1, 2)
    _fns: dict = field(default_factory=dict, repr=False)

    def _fn(self, which: str, n: int):
        key = (which, n)
        if key not in self._fns:
            expr = (self.a_expr if which == "a" else self.delta2_expr)[n]
            self._fns[key] = sp.lambdify(VDER[:5], expr.subs(ALPHA, sp.Rational(self.alpha.numerator,
                                                                                  self.alpha.denominator)), "numpy")
        return self._fns[key]

    def _ders(self, q):
        return [self.potential.derivative(k, q) for k in range(5)]

    def a(self, n: int, q):
        return _broadcast(self._fn("a", n)(*self._ders(q)), q)

    def delta2(self, n: int, q):
        if self.hbar_order < 2:
            raise ValueError("expansion built without hbar^2 corrections")
        return _broadcast(self._fn("d", n)(*self._ders(q)), q)

    def density(self, n: int, q):
        """a_n + hbar^2 delta2 a_n (just a_n at hbar order 0)."""
        out = self.a(n, q)
        if self.hbar_order >= 2:
            out = out + self.hbar**2 * self.delta2(n, q)
        return out

    def series(self, q, sigma):
        """Truncated diagonal sum_n density_n(q) sigma^{n - 1/2}."""
        return sum(self.density(n, q) * sigma ** (n + float(self.sigma_power_offset)) for n in range(self.n_max + 1))

    def table(self, q0: float) -> list[tuple[int, float, float]]:
        rows = []
        for n in range(self.n_max + 1):
            d = float(self.delta2(n, q0)) if self.hbar_order >= 2 else 0.0
            rows.append((n, float(self.a(n, q0)), d))
        return rows


def _broadcast(val, q):
    return val * np.ones_like(np.asarray(q, dtype=float)) if np.ndim(q) else float(val)


def _prefactor_expr(normalization: str, hbar) -> sp.Expr:
    base = sp.sqrt(sp.pi / ALPHA)
    if normalization == "standard":
        return base / (2 * sp.pi * sp.nsimplify(hbar))
    if normalization == "paper":
        return base
    raise ValueError(f"unknown normalization {normalization!r}")


def sdw_coefficients(v: PotentialSpec, n_max: int = 4, hbar_order: int = 2, normalization: str = "standard",
                     hbar: float = 1.0) -> SdwExpansion:
    """Coefficients a_n (and delta2 a_n) from the sigma-Taylor expansion of the integrated profile."""
    if hbar_order not in (0, 2):
        raise ValueError("hbar_order must be 0 or 2")
    pref = _prefactor_expr(normalization, hbar)
    a = [sp.simplify(pref * _sdw_expr(n, 0)) for n in range(n_max + 1)]
    d = [sp.simplify(pref * _sdw_expr(n, 2)) for n in range(n_max + 1)] if hbar_order == 2 else []
    return SdwExpansion(Fraction(v.alpha), v, n_max, hbar_order, normalization, hbar, a, d)


def delta2_coefficients(v: PotentialSpec, n_max: int = 4, normalization: str = "paper") -> list:
    """Exact delta2 a_n, n = 0..n_max, as sympy expressions in alpha, v0, v1, v2."""
    return sdw_coefficients(v, n_max, 2, normalization).delta2_expr


def sdw_from_profile(profile: MomentumProfile, v: PotentialSpec, n_max: int) -> list[PhasePolynomial]:
    """Exact q-polynomial coefficients (units of sqrt(pi/alpha)) for polynomial v.

    Multiplies the collected profile by the sigma-Taylor series of e^{-v sigma}.
    """
    damp = _exp_series(v.to_phasepoly(), n_max, sign=-1)
    coll = profile.collect()
    out = []
    for n in range(n_max + 1):
        acc = PhasePolynomial()
        for off, poly in coll.items():
            if 0 <= n - off <= n_max:
                acc = acc + damp[n - off] * poly
        out.append(acc)
    return out


# -- traces -------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    q_range: tuple[float, float] = (-12.0, 12.0)
    p_range: tuple[float, float] = (-12.0, 12.0)
    n_q: int = 241
    n_p: int = 241
    tol: float = 1e-9


def _trapezoid2(symbol, qs, ps):
    Q, Pm = np.meshgrid(qs, ps, indexing="ij")
    vals = np.asarray(symbol(Q, Pm), dtype=float)
    return float(np.trapezoid(np.trapezoid(vals, ps, axis=1), qs))


def heat_trace_phase_space(symbol: Callable, quad: QuadratureSpec = QuadratureSpec(),
                           normalization: str = "standard", hbar: float = 1.0) -> float:
    """Trapezoid phase-space integral of a vectorized symbol(q, p), normalized.

    Convergence is checked against the half-resolution rule.
    """
    qs = np.linspace(*quad.q_range, quad.n_q)
    ps = np.linspace(*quad.p_range, quad.n_p)
    fine = _trapezoid2(symbol, qs, ps)
    coarse = _trapezoid2(symbol, qs[::2], ps[::2]) if quad.n_q % 2 and quad.n_p % 2 else fine
    if abs(fine - coarse) > quad.tol * max(1.0, abs(fine)):
        raise ArithmeticError(f"phase-space quadrature not converged: {fine!r} vs {coarse!r}")
    return fine * normalization_factor(normalization, hbar)


def phase_space_trace_asymptotics(v: PotentialSpec, hbar_order: int = 2, hbar: float = 1.0,
                                  normalization: str = "standard", gamma: int = 2) -> list[tuple[float, float]]:
    """Small-sigma terms (coefficient, power) of Tr e^{-H sigma} for v = c q^{2m}.

    Integrates e^{-H sigma}(1 + hbar^2 G_2 + hbar^4 G_4) over the whole of
    phase space with Gamma-function moments.  ``gamma = 4`` (H = alpha p^4 + v)
    supports the classical term only.
    """
    cs = v.coeffs if v.is_polynomial else ()
    nz = [k for k, c in enumerate(cs) if c]
    if len(nz) != 1 or nz[0] % 2 or nz[0] == 0 or cs[nz[0]] <= 0:
        raise ValueError("trace asymptotics need v = c q^{2m} with c > 0")
    deg, c = nz[0], cs[nz[0]]
    if gamma != 2 and hbar_order:
        raise ValueError("hbar corrections are only wired for gamma = 2")
    q = sp.Symbol("q")
    vq = sp.Rational(c.numerator, c.denominator) * q**deg
    subs = {VDER[k]: sp.diff(vq, q, k) for k in range(1, 5)}
    alpha = sp.Rational(v.alpha.numerator, v.alpha.denominator)
    subs[ALPHA] = alpha
    total: dict[Fraction, float] = {}
    cf = float(c)
    for order in range(0, hbar_order + 1, 2):
        expr = sp.expand(generic_gcal(order).subs(subs))
        poly = sp.Poly(expr, q, P, SIGMA)
        for (i, j, s), coeff in poly.terms():
            if i % 2 or j % 2:
                continue
            # int q^i e^{-c sigma q^deg} dq * int p^j e^{-alpha sigma p^gamma} dp
            eq, ep = Fraction(i + 1, deg), Fraction(j + 1, gamma)
            amp = (2.0 / deg * math.gamma(eq) * cf ** -float(eq)) * (2.0 / gamma * math.gamma(ep) * float(alpha) ** -float(ep))
            power = s - eq - ep
            total[power] = total.get(power, 0.0) + float(coeff) * amp * hbar**order
    norm = normalization_factor(normalization, hbar)
    return [(total[pw] * norm, float(pw)) for pw in sorted(total) if total[pw] != 0.0]


def derivative_asymptotics(terms: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Asymptotics of -d/dsigma, i.e. of Tr(H e^{-H sigma})."""
    return [(-b * e, e - 1) for b, e in terms if e != 0]


@dataclass(frozen=True)
class ZetaEvaluation:
    s: float
    value: float
    split_point: float
    small_sigma_order: int
    error_estimate: float


def zeta_mellin(trace: Callable[[float], float], s: float, split: float = 1.0,
                asymptotics: Sequence[tuple[float, float]] = (), lambda_min: float | None = None,
                n_terms: int | None = None, leading_power: float | None = None) -> ZetaEvaluation:
    """zeta(s) = Gamma(s)^{-1} int_0^inf sigma^{s-1} Tr(sigma) d sigma by Mellin splitting.

    On (0, split) the supplied asymptotic terms b sigma^e are integrated
    analytically (b split^{s+e}/(s+e)) and the remainder numerically; on
    (split, inf) the trace is integrated with an exponential tail bound
    from ``lambda_min``.  ``n_terms`` limits how many asymptotic terms are
    subtracted (all by default).
    """
    terms = list(asymptotics)[: (len(asymptotics) if n_terms is None else n_terms)]
    if split <= 0:
        raise ValueError("split point must be positive")
    if terms:
        last = max(e for _, e in terms)
        if s + last + 1 <= 0:
            raise ValueError(f"s = {s} needs more subtracted terms (remainder ~ sigma^{last + 1})")
        if any(abs(s + e) < 1e-14 for _, e in terms):
            raise ValueError("s sits on a pole of the subtracted terms")
    elif leading_power is not None and s + leading_power <= 0:
        raise ValueError(f"s = {s} is in the divergent region without subtractions")

    def remainder(x):
        return trace(x) - sum(b * x**e for b, e in terms)

    if terms:
        # the remainder is a difference of large numbers near 0; integrate it on
        # (delta, split) and estimate the sliver assuming R ~ sigma^{e_last + 1}
        delta = 1e-3 * split
        head, err_h = integrate.quad(lambda x: x ** (s - 1) * remainder(x), delta, split,
                                     epsabs=1e-14, epsrel=1e-12, limit=200)
        sliver = remainder(delta) * delta**s / (s + last + 1)
        head += sliver
        err_h += abs(sliver)
    else:
        head, err_h = integrate.quad(lambda x: trace(max(x, 1e-300)), 0.0, split, weight="alg",
                                     wvar=(s - 1, 0), epsabs=1e-14, epsrel=1e-12, limit=200)
    analytic = sum(b * split ** (s + e) / (s + e) for b, e in terms)
    if lambda_min is None:
        tail_val, err_t = integrate.quad(lambda x: x ** (s - 1) * trace(x), split, np.inf,
                                         epsabs=1e-14, epsrel=1e-12, limit=200)
        bound = 0.0
    else:
        if lambda_min <= 0:
            raise ValueError("lambda_min must be positive")
        top = split + 60.0 / lambda_min
        tail_val, err_t = integrate.quad(lambda x: x ** (s - 1) * trace(x), split, top,
                                         epsabs=1e-14, epsrel=1e-12, limit=400)
        bound = abs(trace(top)) * top ** (s - 1) / lambda_min * max(1.0, abs(s - 1) / (lambda_min * top) + 1)
    g = special.gamma(s)
    value = (head + analytic + tail_val) / g
    return ZetaEvaluation(s, float(value), split, len(terms), float((err_h + err_t + bound) / abs(g)))


def zeta_direct_sum(eigenvalue: Callable[[np.ndarray], np.ndarray], s: float, N: int,
                    tail: bool = False) -> float:
    """sum_{n<N} lambda_n^{-s}, optionally plus an Euler-Maclaurin tail for smooth lambda(n).

    The tail integral uses x = N/u so that power-law spectra become an
    algebraic endpoint weight u^{s-2} on (0, 1).
    """
    n = np.arange(N, dtype=float)
    head = math.fsum(eigenvalue(n) ** -s)
    if not tail:
        return head

    def g(x):
        return float(eigenvalue(np.array([x], dtype=float))[0]) ** -s

    body, _ = integrate.quad(lambda u: g(N / u) * N * u ** (-s) if u > 0 else float(N) ** (1 - s), 0.0, 1.0,
                             weight="alg", wvar=(s - 2, 0), epsabs=0.0, epsrel=1e-13, limit=200)
    # sum_{n>=N} f(n) ~ int_N^inf f + f(N)/2 - f'(N)/12
    h = 1e-3 * max(1.0, N)
    deriv = (g(N + h) - g(N - h)) / (2 * h)
    return head + body + 0.5 * g(N) - deriv / 12


def green_from_sigma_integral(symbol: Callable[[float], float], sigma_max: float = 60.0,
                              lambda_min: float = 0.5) -> tuple[float, float]:
    """int_0^inf symbol(sigma) d sigma with an e^{-lambda_min sigma}/lambda_min tail beyond sigma_max.

    Returns (value, error estimate).
    """
    if lambda_min <= 0:
        raise ValueError("green function needs a strictly positive spectrum")
    val, err = integrate.quad(symbol, 0.0, sigma_max, epsabs=1e-13, epsrel=1e-12, limit=400)
    tail = symbol(sigma_max) / lambda_min
    return float(val + tail), float(err + abs(tail))


@dataclass(frozen=True)
class FitResult:
    power: float
    amplitude: float
    corrections: tuple
    plain_slope: float
    residual: float


def fit_leading_power(sigmas, values, correction_powers: Sequence[float] = ()) -> FitResult:
    """Fit log y = log A + b log sigma + log(1 + sum_j c_j sigma^{r_j}).

    ``plain_slope`` is the straight log-log regression slope for comparison.
    """
    s = np.asarray(sigmas, float)
    y = np.asarray(values, float)
    if np.any(y <= 0):
        raise ValueError("values must be positive for a log fit")
    ls, ly = np.log(s), np.log(y)
    plain = float(np.polyfit(ls, ly, 1)[0])
    r = np.asarray(correction_powers, float)

    def model(x, lnA, b, *c):
        return lnA + b * x + np.log1p(np.sum(np.asarray(c)[:, None] * np.exp(np.outer(r, x)), axis=0)) if len(c) \
            else lnA + b * x

    p0 = [float(ly[0] - plain * ls[0]), plain] + [0.0] * len(r)
    popt, _ = optimize.curve_fit(model, ls, ly, p0=p0, maxfev=20000)
    res = float(np.max(np.abs(model(ls, *popt) - ly)))
    return FitResult(float(popt[1]), float(math.exp(popt[0])), tuple(float(c) for c in popt[2:]), plain, res)

"""Harmonic oscillator phase-space analytics.

Wigner functions of the number states, their weighted sums (the Weyl symbol
of ``e^{-H sigma}`` and of ``H^{-1}``) and the closed forms that follow from
the Laguerre generating function ``sum_n t^n L_n(x) = e^{-xt/(1-t)}/(1-t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "OscillatorParams",
    "ModeSumResult",
    "laguerre_eval",
    "laguerre_table",
    "wigner_mode",
    "heat_symbol_mode_sum",
    "heat_symbol_closed",
    "green_mode_sum",
    "green_quadrature",
    "mode_sum_trace",
]


@dataclass(frozen=True)
class OscillatorParams:
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.m, self.omega, self.hbar) <= 0:
            raise ValueError("m, omega and hbar must be strictly positive")

    @property
    def quantum(self) -> float:
        """Level spacing hbar * omega."""
        return self.hbar * self.omega

    def x(self, q, p):
        """Laguerre argument (2 / hbar omega) (p^2/m + m omega^2 q^2) = 4 H / (hbar omega)."""
        q, p = np.asarray(q, float), np.asarray(p, float)
        return 2.0 / self.quantum * (p**2 / self.m + self.m * self.omega**2 * q**2)


@dataclass(frozen=True)
class ModeSumResult:
    value: float
    n_terms: int
    tail_bound: float


def laguerre_eval(n: int, x):
    """L_n(x) from (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), 1.0 - x
    if n == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_table(N: int, x) -> np.ndarray:
    """Rows L_0(x), ..., L_{N-1}(x)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((N,) + x.shape)
    out[0] = 1.0
    if N > 1:
        out[1] = 1.0 - x
    for k in range(1, N - 1):
        out[k + 1] = ((2 * k + 1 - x) * out[k] - k * out[k - 1]) / (k + 1)
    return out


def wigner_mode(n: int, q, p, params: OscillatorParams = OscillatorParams(), with_factorial: bool = False):
    """Wigner density of |n><n|: (-1)^n / (pi hbar) e^{-x/2} L_n(x).

    ``with_factorial=True`` divides by an extra n!, which breaks the unit
    normalisation for n >= 2; kept only for side-by-side comparison.
    """
    x = params.x(q, p)
    out = (-1) ** n / (math.pi * params.hbar) * np.exp(-x / 2) * laguerre_eval(n, x)
    if with_factorial:
        out = out / math.factorial(n)
    return out if np.ndim(out) else float(out)


def heat_symbol_mode_sum(q, p, sigma: float, params: OscillatorParams = OscillatorParams(), N: int = 60) -> ModeSumResult:
    """Weyl symbol of e^{-H sigma} as sum_{n<N} 2 pi hbar W_n e^{-hbar omega (n+1/2) sigma}."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = params.x(q, p)
    s = params.quantum * sigma
    L = laguerre_table(N, x)
    n = np.arange(N).reshape((N,) + (1,) * x.ndim)
    terms = 2.0 * (-1.0) ** n * np.exp(-x / 2) * L * np.exp(-s * (n + 0.5))
    value = terms.sum(axis=0)
    # |e^{-x/2} L_n(x)| <= 1
    tail = 2.0 * math.exp(-s * (N + 0.5)) / -math.expm1(-s)
    return ModeSumResult(value if np.ndim(value) else float(value), N, tail)


def heat_symbol_closed(q, p, sigma, params: OscillatorParams = OscillatorParams()):
    """sech(hbar omega sigma/2) exp(-(2 H / hbar omega) tanh(hbar omega sigma/2))."""
    x = params.x(q, p)
    half = 0.5 * params.quantum * np.asarray(sigma, dtype=float)
    out = np.exp(-0.5 * x * np.tanh(half)) / np.cosh(half)
    return out if np.ndim(out) else float(out)


def _accelerate(partials: np.ndarray, rounds: int) -> tuple[float, float]:
    """Repeated neighbour averaging of partial sums of an alternating-type series."""
    s = np.asarray(partials, dtype=float)
    for _ in range(rounds):
        s = 0.5 * (s[1:] + s[:-1])
    return float(s[-1]), float(abs(s[-1] - s[-2]))


def green_mode_sum(q, p, params: OscillatorParams = OscillatorParams(), N: int = 400,
                   paper_variant: bool = False, rounds: int = 8) -> ModeSumResult:
    """Weyl symbol of H^{-1} as sum_n 2 (-1)^n e^{-x/2} L_n(x) / (hbar omega (n + 1/2)).

    The series converges only conditionally at x = 0, so partial sums are
    smoothed by ``rounds`` passes of neighbour averaging; ``tail_bound`` is the
    last change.  ``paper_variant`` sums the printed form with an extra 1/n!
    and prefactor 1/(pi hbar^2 omega); it converges absolutely.
    """
    x = float(params.x(q, p))
    L = laguerre_table(N, x)
    n = np.arange(N)
    if paper_variant:
        fact = np.array([math.lgamma(k + 1) for k in n])
        terms = (-1.0) ** n * np.exp(-x / 2 - fact) * L / (math.pi * params.hbar**2 * params.omega * (n + 0.5))
        partial = np.cumsum(terms)
        return ModeSumResult(float(partial[-1]), N, float(abs(terms[-1])))
    terms = 2.0 * (-1.0) ** n * math.exp(-x / 2) * L / (params.quantum * (n + 0.5))
    partial = np.cumsum(terms)
    value, tail = _accelerate(partial[-(rounds + 2):], rounds)
    return ModeSumResult(value, N, tail)


def green_quadrature(x: float, params: OscillatorParams = OscillatorParams(), return_error: bool = False):
    """(2/hbar omega) e^{-x/2} int_0^1 t^{-1/2} (1+t)^{-1} e^{x t/(1+t)} dt.

    The t^{-1/2} endpoint is removed with t = u^2.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")

    def integrand(u):
        t = u * u
        return 2.0 / (1.0 + t) * math.exp(x * t / (1.0 + t) - x / 2)

    val, err, info = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, full_output=True)[:3]
    if err > 1e-9 * max(1.0, abs(val)):
        raise ArithmeticError(f"green quadrature did not converge (error estimate {err:.3g})")
    scale = 2.0 / params.quantum
    if return_error:
        return scale * val, scale * err
    return scale * val


def mode_sum_trace(kind: str, q, p, params: OscillatorParams = OscillatorParams(), Ns=(10, 20, 40, 80),
                   sigma: float = 1.0) -> list[tuple[int, float, float]]:
    """Convergence rows (N, value, tail_bound) for ``kind`` in {"heat", "green"}."""
    rows = []
    for N in Ns:
        if kind == "heat":
            r = heat_symbol_mode_sum(q, p, sigma, params, N)
        elif kind == "green":
            r = green_mode_sum(q, p, params, N)
        else:
            raise ValueError(f"unknown mode sum {kind!r}")
        rows.append((r.n_terms, float(r.value), float(r.tail_bound)))
    return rows

"""Symbolic-versus-numeric comparison suite used by ``oracle-compare``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy as sp

from .oscillator import OscillatorParams, green_quadrature, heat_symbol_closed, heat_symbol_mode_sum
from .phasepoly import PhasePolynomial, star_product
from .potentials import PotentialSpec
from .sdw import phase_space_trace_asymptotics, sdw_coefficients, zeta_mellin
from .spectral import GridSpec, heat_kernel_matrix, localized_mode_sum, solve
from .starexp import gcal_recursion, hbar_corrections_from_series

__all__ = ["OracleCheck", "run_oracle_suite", "hbar2_taylor_matches_recursion"]


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    reference: float
    tolerance: float

    @property
    def error(self) -> float:
        return abs(self.value - self.reference)

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: value={self.value:.12g} reference={self.reference:.12g} err={self.error:.3g} tol={self.tolerance:.1g}"


def hbar2_taylor_matches_recursion(N_sigma: int = 8) -> bool:
    """hbar^2 Taylor coefficient of the oscillator closed form equals e^{-H s}(-s^2/8 + H s^3/12)."""
    h, s, H = sp.symbols("hbar sigma H", positive=True)
    closed = sp.sech(h * s / 2) * sp.exp(-2 * H / h * sp.tanh(h * s / 2))
    c2 = sp.simplify(sp.series(closed, h, 0, 3).removeO().coeff(h, 2) * sp.exp(H * s))
    if sp.simplify(c2 - (-s**2 / 8 + H * s**3 / 12)) != 0:
        return False
    corr = gcal_recursion(Fraction(1, 2), PotentialSpec.harmonic(), 2, N_sigma)[2]
    Hp = PhasePolynomial.monomial(0, 2, 0, Fraction(1, 2)) + PhasePolynomial.monomial(2, 0, 0, Fraction(1, 2))
    expect = [PhasePolynomial()] * (N_sigma + 1)
    expect[2] = PhasePolynomial.constant(Fraction(-1, 8))
    expect[3] = Hp.scale(Fraction(1, 12))
    return all(corr[k] == expect[k] for k in range(N_sigma + 1))


def run_oracle_suite(quick: bool = True) -> list[OracleCheck]:
    checks: list[OracleCheck] = []
    q, p = PhasePolynomial.q(), PhasePolynomial.p()
    qp = star_product(q, p)
    checks.append(OracleCheck("star q*p imaginary part", float(qp.coefficient(0, 0, 1)[1]), 0.5, 0.0))

    checks.append(OracleCheck("hbar^2 Taylor = recursion G_2", float(hbar2_taylor_matches_recursion()), 1.0, 0.0))

    f = PhasePolynomial.monomial(0, 2, 0, Fraction(1, 2)) + q**3
    ser = hbar_corrections_from_series(f, 6, 2)[2]
    rec = gcal_recursion(Fraction(1, 2), PotentialSpec.polynomial([0, 0, 0, 1]), 2, 6)[2]
    checks.append(OracleCheck("series vs recursion G_2 (alpha p^2 + q^3)", float(ser == rec), 1.0, 0.0))

    params = OscillatorParams()
    for sigma in (0.5, 1.0, 2.0):
        ms = heat_symbol_mode_sum(0.6, -0.3, sigma, params, 60).value
        checks.append(OracleCheck(f"oscillator mode sum vs closed form, sigma={sigma}", ms,
                                  heat_symbol_closed(0.6, -0.3, sigma, params), 1e-9))

    n_points = 401 if quick else 1001
    spec = solve(PotentialSpec.harmonic(), GridSpec(-10, 10, n_points), 80, kinetic="sinc")
    checks.append(OracleCheck("spectral ground energy", float(spec.eigenvalues[0]), 0.5, 1e-8))
    sym = localized_mode_sum(spec, 1.0, q_eval=[0.0], p_grid=[0.0]).values[0, 0]
    checks.append(OracleCheck("spectral heat symbol at origin", float(sym), 1 / math.cosh(0.5), 1e-6))
    G = heat_kernel_matrix(spec, 1.0)
    checks.append(OracleCheck("grid heat trace sigma=1", float(spec.grid.h * np.trace(G)),
                              1 / (2 * math.sinh(0.5)), 1e-6))

    asy = phase_space_trace_asymptotics(PotentialSpec.harmonic(), 4)
    z = zeta_mellin(lambda s: 1 / (2 * math.sinh(s / 2)), 2.0, 1.0, asy, lambda_min=0.5)
    checks.append(OracleCheck("zeta(2) harmonic", z.value, math.pi**2 / 2, 1e-6))

    checks.append(OracleCheck("green at origin", green_quadrature(0.0), math.pi, 1e-6))

    e = sdw_coefficients(PotentialSpec.harmonic(), 2, 2, "paper")
    checks.append(OracleCheck("delta2 a_2 harmonic (paper normalization)", float(e.delta2(2, 0.3)),
                              -math.sqrt(math.pi / 2) / 6, 1e-12))
    return checks

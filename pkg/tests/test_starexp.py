import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from phasequant.oscillator import heat_symbol_closed
from phasequant.phasepoly import PhasePolynomial, star_power
from phasequant.potentials import DomainError, PotentialSpec
from phasequant.starexp import (
    MAX_SERIES_ORDER,
    eps2_general,
    eps2_potential,
    f2_g2_truncated,
    gcal2_closed,
    gcal4,
    gcal_numeric,
    gcal_recursion,
    gcal_recursion_f,
    hbar_corrections_from_series,
    star_exp_sigma_series,
)

q, p = PhasePolynomial.q(), PhasePolynomial.p()
H = (p**2 + q**2).scale(Fraction(1, 2))
qs, ps, ss = sp.symbols("q p sigma")


def kinetic(alpha):
    return PhasePolynomial.monomial(0, 2, 0, alpha)


def series_to_sympy(series):
    out = 0
    for n, c in enumerate(series):
        for (i, j, _), (re_, im_) in c.items():
            out += (sp.Rational(int(re_.numerator), int(re_.denominator))
                    + sp.I * sp.Rational(int(im_.numerator), int(im_.denominator))) * qs**i * ps**j * ss**n
    return sp.expand(out)


# -- sigma series -------------------------------------------------------------

def test_series_examples():
    s = star_exp_sigma_series(H, 4)
    assert s[0] == PhasePolynomial.constant(1)
    assert len(s) == 5
    assert s[2] == star_power(H, 2).scale(Fraction(1, 2))
    assert s[2] == (H * H - PhasePolynomial.hbar() ** 2 * Fraction(1, 4)).scale(Fraction(1, 2))


def test_series_matches_oscillator_closed_form():
    s = star_exp_sigma_series(H, 20)
    val = s.evaluate(0.6, 0.0, 0.5, 1.0)
    assert abs(val - heat_symbol_closed(0.6, 0.0, 0.5)) < 1e-9


def test_series_order_guard_and_hbar_input():
    with pytest.raises(ValueError):
        star_exp_sigma_series(H, MAX_SERIES_ORDER + 1)
    with pytest.raises(ValueError):
        star_exp_sigma_series(H, 0)
    with pytest.raises(ValueError):
        star_exp_sigma_series(H + PhasePolynomial.hbar(), 3)


@pytest.mark.parametrize("lam", [2, 3])
def test_scaling_covariance(lam):
    f = kinetic(Fraction(1, 2)) + q**3
    a = star_exp_sigma_series(f.scale(lam), 6)
    b = star_exp_sigma_series(f, 6)
    for n in range(7):
        assert a[n] == b[n].scale(Fraction(lam) ** n)


# -- hbar corrections ----------------------------------------------------------

def test_series_regrouping_low_orders():
    c = hbar_corrections_from_series(kinetic(Fraction(1, 2)) + q**3, 6, 4)
    assert c[0] == c[0].constant(PhasePolynomial.constant(1), 6)
    assert c[1].is_zero()
    assert c[3].is_zero()


@pytest.mark.parametrize("deg", [1, 2, 3, 4])
@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(1)])
def test_pipeline_equivalence(deg, alpha):
    v = PotentialSpec.polynomial([0] * deg + [1], alpha=alpha)
    f = v.hamiltonian()
    ser = hbar_corrections_from_series(f, 8, 4)
    rec = gcal_recursion(alpha, v, 4, 8)
    assert ser[2] == rec[2]
    assert ser[4] == rec[4]


def test_pipeline_equivalence_mixed_polynomial():
    f = PhasePolynomial({(1, 1, 0): 1, (0, 2, 0): 2, (2, 0, 0): -1, (1, 0, 0): 3})
    ser = hbar_corrections_from_series(f, 6, 4)
    rec = gcal_recursion_f(f, 4, 6)
    for n in range(5):
        assert ser[n] == rec[n]


def test_odd_orders_vanish_and_boundary_condition():
    v = PotentialSpec.polynomial([1, -2, 0, 1, 1])
    rec = gcal_recursion(Fraction(1, 2), v, 5, 7)
    for n in (1, 3, 5):
        assert rec[n].is_zero()
    for n in range(1, 6):
        assert rec[n][0].is_zero()


def test_free_particle_has_no_corrections():
    rec = gcal_recursion(Fraction(1, 2), PotentialSpec.polynomial([]), 4, 8)
    for n in range(1, 5):
        assert rec[n].is_zero()


def test_gcal2_oscillator_closed_form():
    g2 = gcal_recursion(Fraction(1, 2), PotentialSpec.harmonic(), 2, 6)[2]
    assert series_to_sympy(g2) == sp.expand(-ss**2 / 8 + ss**3 * (qs**2 + ps**2) / 24)


def test_gcal2_generic_formula_matches_recursion():
    alpha = Fraction(1, 3)
    v = PotentialSpec.polynomial([0, 1, -1, 2], alpha=alpha)
    g2 = series_to_sympy(gcal_recursion(alpha, v, 2, 5)[2])
    vq = qs - qs**2 + 2 * qs**3
    a = sp.Rational(1, 3)
    expect = (-a / 4 * ss**2 * sp.diff(vq, qs, 2) + a**2 / 6 * ss**3 * ps**2 * sp.diff(vq, qs, 2)
              + a / 12 * ss**3 * sp.diff(vq, qs) ** 2)
    assert g2 == sp.expand(expect)
    assert gcal2_closed(alpha, v, 0.7, -0.2, 0.9) == pytest.approx(float(expect.subs({qs: 0.7, ps: -0.2, ss: 0.9})))


def test_gcal_numeric_matches_recursion():
    v = PotentialSpec.polynomial([0, 0, 1, 1, 1])
    rec = gcal_recursion(v.alpha, v, 4, 14)
    for n in (2, 4):
        # G_4 has sigma-degree 6, so the truncation is exact
        assert gcal_numeric(v, n, 0.4, 0.3, 0.2) == pytest.approx(rec[n].evaluate(0.4, 0.3, 0.2), rel=1e-10)


# -- F2, G2, E2 -----------------------------------------------------------------

def test_f2_g2_partial_sums():
    assert f2_g2_truncated(0.0, 3) == pytest.approx((0.5, 1 / 3))
    for f, N in ((1.0, 50), (-3.0, 60)):
        F, G = f2_g2_truncated(f, N)
        assert abs(F - math.exp(f) / 2) < 1e-12
        assert abs(G - math.exp(f) / 3) < 1e-12
    with pytest.raises(ValueError):
        f2_g2_truncated(1.0, 1)


def test_eps2_general_trivial_cases():
    assert eps2_general(q)(0.3, 0.4) == 0
    assert eps2_general(p**2)(0.3, 0.4) == 0


@pytest.mark.parametrize("sigma", [Fraction(3, 10), Fraction(1)])
def test_eps2_general_matches_series(sigma):
    e2 = eps2_general(H.scale(-sigma))
    g2 = gcal_recursion_f(H, 2, 6)[2]
    for x in np.linspace(-1, 1, 5):
        for y in np.linspace(-1, 1, 5):
            s = float(sigma)
            ref = math.exp(-H.evaluate(x, y) * s) * g2.evaluate(x, y, s)
            assert abs(e2(x, y) - ref) < 1e-10


def test_eps2_potential_examples():
    assert eps2_potential(PotentialSpec.harmonic(), 1.0, 0.0, 0.0) == pytest.approx(-1 / 8)
    rng = random.Random(5)
    for _ in range(20):
        qq, s, pp = rng.uniform(0.2, 3), rng.uniform(0.1, 2), rng.uniform(-2, 2)
        assert eps2_potential(PotentialSpec.yukawa(1.3, 0.0), s, qq, pp) == eps2_potential(PotentialSpec.coulomb(1.3), s, qq, pp)
    v = PotentialSpec.coulomb(1.0, alpha=Fraction(1))
    a, v1, v2 = 1.0, -1.0, 2.0
    direct = math.exp(-(0 + 1.0)) * (-a / 4 * v2 + a / 12 * v1**2)
    assert eps2_potential(v, 1.0, 1.0, 0.0) == pytest.approx(direct, rel=1e-14)
    with pytest.raises(DomainError):
        eps2_potential(v, 1.0, -0.5, 0.0)


def test_eps2_potential_oscillator_taylor():
    # hbar^2 coefficient of the closed oscillator symbol by finite differences in hbar
    from phasequant.oscillator import OscillatorParams

    qq, pp, s = 0.6, -0.4, 0.8
    h = 1e-2
    f = [heat_symbol_closed(qq, pp, s, OscillatorParams(1, 1, k * h)) for k in (1, 2)]
    # closed form is even in hbar: f(h) = c0 + c2 h^2 + c4 h^4
    c0 = math.exp(-(qq**2 + pp**2) / 2 * s)
    c2 = (16 * (f[0] - c0) - (f[1] - c0)) / (12 * h**2)
    assert eps2_potential(PotentialSpec.harmonic(), s, qq, pp) == pytest.approx(c2, rel=1e-6)


# -- G4 -------------------------------------------------------------------------

def test_gcal4_free_and_linear():
    assert gcal4(PotentialSpec.polynomial([]), 8).series.is_zero()
    lin = gcal4(PotentialSpec.polynomial([0, 1]), 8).series
    g4 = series_to_sympy(lin)
    # v' = 1 and higher derivatives vanish: only powers of v'^2 times sigma survive, no p dependence
    assert not g4.has(ps) and not g4.has(qs)
    assert g4 != 0


def test_gcal4_oscillator_taylor():
    res = gcal4(PotentialSpec.harmonic(), 8)
    h = sp.symbols("hbar", positive=True)
    Hs = (qs**2 + ps**2) / 2
    closed = sp.sech(h * ss / 2) * sp.exp(-2 * Hs / h * sp.tanh(h * ss / 2))
    c4 = sp.series(closed, h, 0, 5).removeO().coeff(h, 4) * sp.exp(Hs * ss)
    c4 = sp.series(sp.simplify(c4), ss, 0, 7).removeO()
    ours = series_to_sympy(res.series)
    ours = sum(ours.coeff(ss, n) * ss**n for n in range(7))
    assert sp.expand(ours - c4) == 0
    assert res.comparison["n_terms"] == len(res.comparison["terms"]) > 0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from phasequant.oscillator import (
    ModeSumResult,
    OscillatorParams,
    green_mode_sum,
    green_quadrature,
    heat_symbol_closed,
    heat_symbol_mode_sum,
    laguerre_eval,
    laguerre_table,
    mode_sum_trace,
    wigner_mode,
)
from phasequant.potentials import PotentialSpec
from phasequant.sdw import green_from_sigma_integral
from phasequant.spectral import GridSpec, mode_symbols, solve

UNIT = OscillatorParams()
GRID7 = np.linspace(-1.5, 1.5, 7)


def x_at(x, params=UNIT):
    """A (q, p) point with Laguerre argument x (q chosen, p = 0)."""
    return math.sqrt(x * params.quantum / (2 * params.m * params.omega**2)), 0.0


def test_params_validation():
    with pytest.raises(ValueError):
        OscillatorParams(m=0)
    assert UNIT.x(1.0, 1.0) == pytest.approx(4.0)


def test_laguerre_examples():
    assert laguerre_eval(0, 3.7) == 1
    for n in range(12):
        assert laguerre_eval(n, 0.0) == pytest.approx(1.0)
    assert laguerre_eval(2, 1.0) == pytest.approx(-0.5)
    from scipy.special import eval_laguerre

    xs = np.linspace(0, 20, 9)
    assert laguerre_table(15, xs)[-1] == pytest.approx(eval_laguerre(14, xs), rel=1e-10, abs=1e-10)
    with pytest.raises(ValueError):
        laguerre_eval(-1, 0.0)


def test_wigner_ground_state_value():
    assert wigner_mode(0, 0.0, 0.0) == pytest.approx(1 / math.pi)


@pytest.mark.parametrize("n", range(11))
def test_wigner_normalization(n):
    # x = 2 (q^2 + p^2), so dq dp = (pi / 2) dx after the angular integral
    val, _ = integrate.quad(lambda x: wigner_mode(n, *x_at(x)) * math.pi / 2, 0, np.inf, limit=400)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_wigner_paper_variant_fails_normalization():
    val, _ = integrate.quad(lambda x: wigner_mode(3, *x_at(x), with_factorial=True) * math.pi / 2, 0, np.inf, limit=400)
    assert abs(val - 1) > 0.5


def test_wigner_matches_numeric_transform():
    spec = solve(PotentialSpec.harmonic(), GridSpec(-10, 10, 401), 6, kinetic="sinc")
    qe, pe = np.linspace(-3, 3, 13), np.linspace(-3, 3, 13)
    num = mode_symbols(spec, qe, pe, modes=[3])[0] / (2 * math.pi)
    ref = wigner_mode(3, qe[:, None], pe[None, :])
    assert np.max(np.abs(num - ref)) < 1e-5


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 15), st.floats(-3, 3), st.floats(-3, 3))
def test_wigner_parity(n, q, p):
    assert wigner_mode(n, q, p) == pytest.approx(wigner_mode(n, -q, -p))


def test_heat_mode_sum_examples():
    r = heat_symbol_mode_sum(0.0, 0.0, 1.0, UNIT, 60)
    assert isinstance(r, ModeSumResult)
    assert abs(r.value - 1 / math.cosh(0.5)) < 1e-10
    assert math.isfinite(r.tail_bound)
    assert heat_symbol_mode_sum(0.3, 0.2, 1e-3, UNIT, 5000).value == pytest.approx(1.0, abs=1e-2)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_heat_mode_sum_equals_closed_form(sigma):
    for q in GRID7:
        for p in GRID7:
            ms = heat_symbol_mode_sum(q, p, sigma, UNIT, 80).value
            cf = heat_symbol_closed(q, p, sigma)
            assert abs(ms - cf) < 1e-9
            assert ms > 0


def test_heat_closed_form_limits_and_trace():
    assert heat_symbol_closed(0.7, -0.3, 1e-12) == pytest.approx(1.0)
    for sigma in (0.5, 1.0, 2.0):
        val, _ = integrate.dblquad(lambda p, q: heat_symbol_closed(q, p, sigma), -np.inf, np.inf, -np.inf, np.inf,
                                   epsabs=1e-13, epsrel=1e-12)
        assert abs(val / (2 * math.pi) - 1 / (2 * math.sinh(sigma / 2))) < 1e-10


def test_heat_closed_form_other_params():
    params = OscillatorParams(m=2.0, omega=0.5, hbar=0.7)
    for q, p in ((0.3, 0.4), (1.0, -0.8)):
        ms = heat_symbol_mode_sum(q, p, 1.3, params, 120).value
        assert ms == pytest.approx(heat_symbol_closed(q, p, 1.3, params), abs=1e-9)


def test_green_quadrature_examples():
    assert green_quadrature(0.0) == pytest.approx(math.pi, abs=1e-12)
    assert green_quadrature(10.0) < green_quadrature(1.0)
    with pytest.raises(ValueError):
        green_quadrature(-1.0)
    params = OscillatorParams(hbar=0.5)
    assert green_quadrature(0.0, params) == pytest.approx(math.pi / 0.5)


@pytest.mark.parametrize("x", [0.0, 1.0, 4.0])
def test_green_quadrature_equals_sigma_integral(x):
    q, p = x_at(x)
    val, _ = green_from_sigma_integral(lambda s: heat_symbol_closed(q, p, s), lambda_min=0.5)
    assert abs(val - green_quadrature(x)) < 1e-8


def test_green_mode_sum_origin():
    assert abs(green_mode_sum(0.0, 0.0, UNIT, 400).value - math.pi) < 1e-4


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_green_mode_sum_matches_quadrature(x):
    q, p = x_at(x)
    assert abs(green_mode_sum(q, p, UNIT, 400).value - green_quadrature(x)) < 1e-4


def test_green_paper_variant_is_reported():
    r = green_mode_sum(0.0, 0.0, UNIT, 60, paper_variant=True)
    ref = sum((-1) ** n / ((n + 0.5) * math.factorial(n)) for n in range(60)) / math.pi
    assert r.value == pytest.approx(ref, rel=1e-12)
    assert abs(r.value - math.pi) > 1


def test_mode_sum_trace_rows():
    rows = mode_sum_trace("heat", 0.2, 0.1)
    assert [r[0] for r in rows] == [10, 20, 40, 80]
    assert rows[-1][1] == pytest.approx(heat_symbol_closed(0.2, 0.1, 1.0), abs=1e-12)
    with pytest.raises(ValueError):
        mode_sum_trace("other", 0, 0)

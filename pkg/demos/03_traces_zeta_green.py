"""Heat traces, the zeta function by Mellin splitting, and the phase-space Green function."""
# %%
import math

from phasequant.oscillator import green_mode_sum, green_quadrature, heat_symbol_closed
from phasequant.potentials import PotentialSpec
from phasequant.sdw import (
    green_from_sigma_integral,
    heat_trace_phase_space,
    phase_space_trace_asymptotics,
    sdw_coefficients,
    zeta_mellin,
)

harmonic = PotentialSpec.harmonic()

# %% Phase-space trace against the spectral sum.
for sigma in (0.5, 1.0, 2.0):
    tr = heat_trace_phase_space(lambda q, p: heat_symbol_closed(q, p, sigma))
    print(f"sigma={sigma}: trace {tr:.12f}  vs  {1 / (2 * math.sinh(sigma / 2)):.12f}")

# %% Small-sigma terms feed the Mellin split; zeta(2) = pi^2/2.
asy = phase_space_trace_asymptotics(harmonic, 4)
print("small-sigma terms (coefficient, power):", asy)
z = zeta_mellin(lambda s: 1 / (2 * math.sinh(s / 2)), 2.0, 1.0, asy, lambda_min=0.5)
print("zeta(2) =", z.value, " pi^2/2 =", math.pi**2 / 2)

# %% Diagonal coefficients with hbar^2 corrections, in both normalizations.
for norm in ("standard", "paper"):
    print(norm, sdw_coefficients(harmonic, 3, 2, norm).table(0.5))

# %% The Green function at the origin by three routes.
print("sigma integral :", green_from_sigma_integral(lambda s: heat_symbol_closed(0.0, 0.0, s))[0])
print("quadrature     :", green_quadrature(0.0))
print("mode sum       :", green_mode_sum(0.0, 0.0).value)

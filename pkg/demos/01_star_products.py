"""Exact Moyal products and star exponentials of polynomial symbols."""
# %%
from fractions import Fraction

from phasequant.phasepoly import PhasePolynomial, moyal_bracket, parse_polynomial, star_power, star_product
from phasequant.potentials import PotentialSpec
from phasequant.starexp import gcal_recursion, hbar_corrections_from_series

q, p = PhasePolynomial.q(), PhasePolynomial.p()

# %% The canonical pair: q*p picks up i hbar/2 and the bracket is i hbar.
print("q*p   =", star_product(q, p).to_text())
print("[q,p] =", moyal_bracket(q, p).to_text())

# %% Star powers of the oscillator symbol differ from pointwise powers at even orders of hbar.
H = parse_polynomial("(1/2) p^2 + (1/2) q^2")
print("H*H   =", star_power(H, 2).to_text())

# %% Correction series G_n for f = p^2/2 + q^3, from two independent constructions.
v = PotentialSpec.polynomial([0, 0, 0, 1])
f = v.hamiltonian()
series = hbar_corrections_from_series(f, 6, 4)
recursion = gcal_recursion(Fraction(1, 2), v, 4, 6)
print("G_2 agrees:", series[2] == recursion[2], " G_4 agrees:", series[4] == recursion[4])
print("G_2 =", recursion[2].to_text())

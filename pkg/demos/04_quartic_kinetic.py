"""Leading small-sigma power of the heat-kernel diagonal for H = p^4 + q^2."""
# %%
import math

import numpy as np

from phasequant.potentials import PotentialSpec
from phasequant.sdw import fit_leading_power
from phasequant.spectral import GridSpec, solve

v = PotentialSpec.polynomial([0, 0, 1], alpha=1)
spec = solve(v, GridSpec(-8, 8, 321), 321, kinetic="sinc", gamma=4)
sig = np.linspace(0.02, 0.2, 19)
diag = np.array([np.sum(np.exp(-spec.eigenvalues * s) * spec.eigenvectors[160] ** 2) for s in sig])

# %% A straight log-log slope is biased by the corrections; fitting them recovers -1/4.
fit = fit_leading_power(sig, diag, (1.5, 3))
print("plain slope  :", fit.plain_slope)
print("fitted power :", fit.power)
print("amplitude    :", fit.amplitude, " expected", math.gamma(0.25) / (4 * math.pi))

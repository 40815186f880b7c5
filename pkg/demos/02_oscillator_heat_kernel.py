"""Three routes to the Weyl symbol of exp(-H sigma) for the harmonic oscillator."""
# %%
import numpy as np

from phasequant.oscillator import heat_symbol_closed, heat_symbol_mode_sum
from phasequant.potentials import PotentialSpec
from phasequant.spectral import GridSpec, heat_kernel_matrix, solve, weyl_transform_numeric

sigma = 1.0
pts = np.linspace(-1.5, 1.5, 4)

# %% Closed form and the Laguerre mode sum.
closed = heat_symbol_closed(pts[:, None], pts[None, :], sigma)
modes = np.array([[heat_symbol_mode_sum(a, b, sigma, N=80).value for b in pts] for a in pts])

# %% Numeric Weyl transform of the grid heat kernel.
spec = solve(PotentialSpec.harmonic(), GridSpec(-10, 10, 801), 80, kinetic="sinc")
grid = weyl_transform_numeric(heat_kernel_matrix(spec, sigma), spec.grid, pts, q_eval=pts).values

print("closed form:\n", np.round(closed, 8))
print("max |mode sum - closed| =", np.max(np.abs(modes - closed)))
print("max |grid - closed|     =", np.max(np.abs(grid - closed)))

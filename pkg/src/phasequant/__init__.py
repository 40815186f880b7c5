"""Deformation quantization toolkit: Moyal star products, star exponentials,
Wigner mode sums, heat-kernel coefficients and zeta functions for 1-D
Hamiltonians ``H = alpha p^2 + v(q)``."""

__version__ = "0.1.0"

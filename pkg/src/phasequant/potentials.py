"""Potential families v(q) with analytic derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .phasepoly import PhasePolynomial

__all__ = ["DomainError", "PotentialSpec"]


class DomainError(ValueError):
    """Evaluation outside a potential's domain (q <= 0 for coulomb/yukawa)."""


@dataclass(frozen=True)
class PotentialSpec:
    """Hamiltonian ``H = alpha p^2 + v(q)`` with v from one of three families.

    ``coeffs`` holds exact polynomial coefficients in ascending order
    (``coeffs[k]`` multiplies ``q**k``).  Coulomb is ``z/q`` and Yukawa is
    ``z exp(-mu q)/q``; both live on ``q > 0``.
    """

    family: str
    alpha: Fraction = Fraction(1, 2)
    coeffs: tuple[Fraction, ...] = ()
    z: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if self.family not in ("polynomial", "coulomb", "yukawa"):
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.family == "yukawa" and self.mu < 0:
            raise ValueError("yukawa mu must be >= 0")

    # -- constructors -------------------------------------------------
    @classmethod
    def polynomial(cls, coeffs, alpha=Fraction(1, 2)) -> "PotentialSpec":
        cs = tuple(Fraction(c) for c in coeffs)
        while cs and cs[-1] == 0:
            cs = cs[:-1]
        return cls("polynomial", Fraction(alpha), cs)

    @classmethod
    def harmonic(cls, m=1, omega=1) -> "PotentialSpec":
        """``p^2/2m + m omega^2 q^2/2``."""
        m, omega = Fraction(m), Fraction(omega)
        return cls.polynomial([0, 0, m * omega**2 / 2], alpha=1 / (2 * m))

    @classmethod
    def coulomb(cls, z=1.0, alpha=Fraction(1, 2)) -> "PotentialSpec":
        return cls("coulomb", Fraction(alpha), z=float(z))

    @classmethod
    def yukawa(cls, z=1.0, mu=0.0, alpha=Fraction(1, 2)) -> "PotentialSpec":
        return cls("yukawa", Fraction(alpha), z=float(z), mu=float(mu))

    # -- properties -----------------------------------------------------
    @property
    def is_polynomial(self) -> bool:
        return self.family == "polynomial"

    @property
    def mass(self) -> Fraction:
        return 1 / (2 * self.alpha)

    def in_domain(self, q) -> bool:
        return self.is_polynomial or bool(np.all(np.asarray(q) > 0))

    def check_domain(self, q) -> None:
        if not self.in_domain(q):
            raise DomainError(f"{self.family} potential requires q > 0")

    # -- evaluation -----------------------------------------------------
    def derivative(self, n: int, q):
        """n-th derivative of v at q (n = 0 gives v itself)."""
        self.check_domain(q)
        q = np.asarray(q, dtype=float)
        if self.is_polynomial:
            out = np.zeros_like(q)
            for k, c in enumerate(self.coeffs):
                if k >= n and c:
                    out = out + float(c) * math.perm(k, n) * q ** (k - n)
            return out if out.ndim else float(out)
        mu = self.mu if self.family == "yukawa" else 0.0
        # d^n/dq^n [e^{-mu q}/q] = (-1)^n e^{-mu q} sum_k n!/k! mu^k q^(k-n-1)
        s = sum(math.factorial(n) / math.factorial(k) * mu**k * q ** (k - n - 1) for k in range(n + 1))
        out = (-1) ** n * self.z * np.exp(-mu * q) * s
        return out if np.ndim(out) else float(out)

    def __call__(self, q):
        return self.derivative(0, q)

    def to_phasepoly(self) -> PhasePolynomial:
        """v(q) as a PhasePolynomial; only for the polynomial family."""
        if not self.is_polynomial:
            raise TypeError(f"{self.family} potential is not polynomial")
        return PhasePolynomial({(k, 0, 0): c for k, c in enumerate(self.coeffs)})

    def hamiltonian(self) -> PhasePolynomial:
        """Weyl symbol ``alpha p^2 + v(q)`` (polynomial family only)."""
        return PhasePolynomial.monomial(0, 2, 0, self.alpha) + self.to_phasepoly()

    def describe(self) -> str:
        if self.is_polynomial:
            return f"polynomial{tuple(str(c) for c in self.coeffs)}, alpha={self.alpha}"
        if self.family == "coulomb":
            return f"coulomb(z={self.z}), alpha={self.alpha}"
        return f"yukawa(z={self.z}, mu={self.mu}), alpha={self.alpha}"

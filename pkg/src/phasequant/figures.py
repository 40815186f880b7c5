"""Star exponential Exp(f) through hbar^4 on phase-space grids.

Exp(f) is Exp(-f sigma) at sigma = -1, so each column is
e^f (1 + hbar^2 G_2(-1) + hbar^4 G_4(-1)) truncated at the stated order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .potentials import PotentialSpec
from .starexp import gcal_numeric

__all__ = ["FIGURES", "FigureSpec", "figure_columns", "figure_rows"]


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    label: str
    potential: PotentialSpec
    q_range: tuple[float, float]
    p_range: tuple[float, float]


FIGURES = {
    1: FigureSpec(1, "f = p^2 + q^2", PotentialSpec.polynomial([0, 0, 1], alpha=Fraction(1)), (-2.0, 2.0), (-2.0, 2.0)),
    2: FigureSpec(2, "f = p^2 + 1/q", PotentialSpec.coulomb(1.0, alpha=Fraction(1)), (0.5, 3.0), (-2.0, 2.0)),
}


def figure_columns(figure_id: int, q, p, hbar: float = 1.0) -> dict[int, np.ndarray]:
    """{order: value} for orders 0, 2, 4 at the points (q, p)."""
    spec = FIGURES[figure_id]
    v = spec.potential
    q = np.asarray(q, float)
    p = np.asarray(p, float)
    v.check_domain(q)
    f = float(v.alpha) * p**2 + v(q)
    ef = np.exp(f)
    g2 = gcal_numeric(v, 2, q, p, -1.0).real
    g4 = gcal_numeric(v, 4, q, p, -1.0).real
    return {0: ef, 2: ef * (1 + hbar**2 * g2), 4: ef * (1 + hbar**2 * g2 + hbar**4 * g4)}


def figure_rows(figure_id: int, q_range=None, p_range=None, n_q: int = 41, n_p: int = 41, hbar: float = 1.0):
    """Long-format rows (q, p, order, value)."""
    spec = FIGURES[figure_id]
    qs = np.linspace(*(q_range or spec.q_range), n_q)
    ps = np.linspace(*(p_range or spec.p_range), n_p)
    Q, P = np.meshgrid(qs, ps, indexing="ij")
    cols = figure_columns(figure_id, Q, P, hbar)
    rows = []
    for i in range(n_q):
        for j in range(n_p):
            for order in (0, 2, 4):
                rows.append((float(qs[i]), float(ps[j]), order, float(cols[order][i, j])))
    return rows

"""Grid spectral oracle for H = alpha p^2 + v(q) (or alpha p^4 + v(q)).

The Hamiltonian is discretised on a uniform position grid with Dirichlet
walls, diagonalised, and turned into heat kernels and Weyl symbols.  Two
kinetic discretisations are available: ``"fd2"`` (central second difference,
tridiagonal) and ``"sinc"`` (sinc-DVR, dense and spectrally accurate).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse

from .potentials import PotentialSpec

__all__ = [
    "GridSpec",
    "SpectralDecomposition",
    "WignerTable",
    "ConvergenceError",
    "InsufficientModesError",
    "NyquistError",
    "build_hamiltonian",
    "eigendecompose",
    "solve",
    "heat_kernel_matrix",
    "heat_kernel_tail",
    "heat_trace",
    "weyl_transform_numeric",
    "mode_symbols",
    "localized_mode_sum",
    "choose_grid",
]


class ConvergenceError(ArithmeticError):
    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class InsufficientModesError(ValueError):
    pass


class NyquistError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    q_min: float
    q_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if not self.q_min < self.q_max:
            raise ValueError("need q_min < q_max")

    @property
    def h(self) -> float:
        return (self.q_max - self.q_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_points)


@dataclass
class SpectralDecomposition:
    """Lowest eigenpairs; ``eigenvectors[:, n]`` satisfies h * sum psi^2 = 1."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    grid: GridSpec
    hbar: float = 1.0

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    def orthonormality_residual(self) -> float:
        V = self.eigenvectors
        return float(np.max(np.abs(self.grid.h * V.T @ V - np.eye(V.shape[1]))))

    def to_csv(self, stream=None) -> str:
        buf = io.StringIO()
        buf.write(f"# spectral_decomposition q_min={self.grid.q_min!r} q_max={self.grid.q_max!r} "
                  f"n_points={self.grid.n_points} hbar={self.hbar!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "eigenvalue"])
        for n, lam in enumerate(self.eigenvalues):
            w.writerow([n, format(float(lam), ".17g")])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


@dataclass
class WignerTable:
    """Phase-space table ``values[i, j]`` at ``(q[i], p[j])``.

    ``weyl_symbol`` tables map the identity to 1; ``wigner_density`` tables are
    the same divided by 2 pi hbar.
    """

    q: np.ndarray
    p: np.ndarray
    values: np.ndarray
    convention: str = "weyl_symbol"
    hbar: float = 1.0
    tail_estimate: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.convention not in ("weyl_symbol", "wigner_density"):
            raise ValueError(f"unknown convention {self.convention!r}")

    def to(self, convention: str) -> "WignerTable":
        if convention == self.convention:
            return self
        factor = 2 * math.pi * self.hbar
        vals = self.values / factor if convention == "wigner_density" else self.values * factor
        return WignerTable(self.q, self.p, vals, convention, self.hbar, self.tail_estimate, dict(self.meta))

    def integrate(self) -> float:
        """Trapezoid integral of the table over its (q, p) window."""
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.q))

    def trace(self, normalization: str = "standard") -> float:
        """Tr of the represented operator; ``paper`` drops the 1/(2 pi hbar)."""
        total = self.to("weyl_symbol").integrate()
        if normalization == "standard":
            return total / (2 * math.pi * self.hbar)
        if normalization == "paper":
            return total
        raise ValueError(f"unknown normalization {normalization!r}")

    def to_csv(self, stream=None) -> str:
        buf = io.StringIO()
        meta = " ".join(f"{k}={v!r}" for k, v in sorted(self.meta.items()))
        buf.write(f"# convention={self.convention} hbar={self.hbar!r} {meta}".rstrip() + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "p", "value"])
        for i, qv in enumerate(self.q):
            for j, pv in enumerate(self.p):
                w.writerow([format(float(qv), ".17g"), format(float(pv), ".17g"),
                            format(float(self.values[i, j]), ".17g")])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


def _sinc_kinetic(n: int, h: float) -> np.ndarray:
    """Sinc-DVR matrix of -d^2/dq^2 on a uniform grid."""
    idx = np.arange(n)
    d = idx[:, None] - idx[None, :]
    safe = np.where(d == 0, 1, d)
    T = np.where(d == 0, math.pi**2 / 3, 2.0 * np.where(d % 2, -1.0, 1.0) / safe**2)
    return T / h**2


def build_hamiltonian(v: PotentialSpec, grid: GridSpec, hbar: float = 1.0, kinetic: str = "fd2",
                      gamma: int = 2):
    """Grid matrix of alpha p^gamma + v(q), gamma in {2, 4}.

    ``fd2`` returns a sparse matrix (tridiagonal for gamma = 2); ``sinc``
    returns a dense array.
    """
    q = grid.points
    v.check_domain(q)
    if gamma not in (2, 4):
        raise ValueError("gamma must be 2 or 4")
    alpha = float(v.alpha)
    pot = np.asarray(v(q), dtype=float)
    n, h = grid.n_points, grid.h
    if kinetic == "fd2":
        lap = sparse.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr") / h**2
        kin = lap if gamma == 2 else lap @ lap
        return (alpha * hbar**gamma * kin + sparse.diags(pot)).tocsr()
    if kinetic == "sinc":
        T = _sinc_kinetic(n, h)
        kin = T if gamma == 2 else T @ T
        H = alpha * hbar**gamma * kin
        H[np.diag_indices(n)] += pot
        return H
    raise ValueError(f"unknown kinetic discretisation {kinetic!r}")


def eigendecompose(matrix, n_modes: int, grid: GridSpec, hbar: float = 1.0,
                   residual_tol: float = 1e-8) -> SpectralDecomposition:
    """Lowest ``n_modes`` eigenpairs, normalised to h * sum psi^2 = 1."""
    n = grid.n_points
    if not 1 <= n_modes <= n:
        raise ValueError("n_modes must lie in [1, n_points]")
    sel = (0, n_modes - 1)
    if sparse.issparse(matrix):
        dia = sparse.dia_matrix(matrix)
        bw = int(np.max(np.abs(dia.offsets)))
        if bw == 1:
            d = matrix.diagonal()
            e = matrix.diagonal(1)
            w, V = linalg.eigh_tridiagonal(d, e, select="i", select_range=sel)
        else:
            bands = np.zeros((bw + 1, n))
            for k in range(bw + 1):
                bands[k, : n - k] = matrix.diagonal(k)
            w, V = linalg.eig_banded(bands, lower=True, select="i", select_range=sel)
        dense_apply = lambda X: matrix @ X  # noqa: E731
    else:
        M = np.asarray(matrix)
        w, V = linalg.eigh(M, subset_by_index=list(sel))
        dense_apply = lambda X: M @ X  # noqa: E731
    res = np.linalg.norm(dense_apply(V) - V * w, axis=0)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.any(res > residual_tol * scale * math.sqrt(n)):
        raise ConvergenceError("eigensolver residuals above tolerance", residuals=res)
    V = V / math.sqrt(grid.h)
    # deterministic sign: first significant component positive
    for k in range(V.shape[1]):
        j = int(np.argmax(np.abs(V[:, k]) > 1e-8 * np.max(np.abs(V[:, k]))))
        if V[j, k] < 0:
            V[:, k] = -V[:, k]
    return SpectralDecomposition(np.asarray(w), V, grid, hbar)


def solve(v: PotentialSpec, grid: GridSpec, n_modes: int, hbar: float = 1.0, kinetic: str = "fd2",
          gamma: int = 2) -> SpectralDecomposition:
    return eigendecompose(build_hamiltonian(v, grid, hbar, kinetic, gamma), n_modes, grid, hbar)


def heat_kernel_tail(spec: SpectralDecomposition, sigma: float) -> float:
    """Weight e^{-lambda_max sigma} of the highest retained mode."""
    return float(math.exp(-spec.eigenvalues[-1] * sigma))


def heat_kernel_matrix(spec: SpectralDecomposition, sigma: float, tail_tol: float = 1e-12) -> np.ndarray:
    """G(q_i, q_j; sigma) = sum_n e^{-lambda_n sigma} psi_n(q_i) psi_n(q_j)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    tail = heat_kernel_tail(spec, sigma)
    if tail > tail_tol:
        raise InsufficientModesError(
            f"retained modes too few for sigma={sigma}: tail weight {tail:.3g} > {tail_tol:.1g}")
    V = spec.eigenvectors
    w = np.exp(-spec.eigenvalues * sigma)
    G = (V * w) @ V.T
    return 0.5 * (G + G.T)


def heat_trace(spec: SpectralDecomposition, sigma: float) -> float:
    return float(np.sum(np.exp(-spec.eigenvalues * sigma)))


# -- Weyl transform ------------------------------------------------------

def _check_nyquist(p_grid, h, hbar):
    pmax = float(np.max(np.abs(p_grid))) if np.size(p_grid) else 0.0
    if pmax * h / hbar > math.pi / 2:
        raise NyquistError(f"|p| h / hbar = {pmax * h / hbar:.3g} exceeds pi/2")


def _lagrange4(u):
    """Cubic Lagrange weights at nodes -1, 0, 1, 2 for fractional offset u."""
    return np.stack([
        -u * (u - 1) * (u - 2) / 6,
        (u + 1) * (u - 1) * (u - 2) / 2,
        -(u + 1) * u * (u - 2) / 2,
        (u + 1) * u * (u - 1) / 6,
    ], axis=-1)


def _diagonal_stencil(grid: GridSpec, q_eval: np.ndarray):
    """Index pairs and weights giving K(q + m h/2, q - m h/2) for every offset m.

    Each matrix diagonal K[i, i - m] is a function of the centre
    c = q_min + (i - m/2) h sampled on a uniform grid; it is interpolated
    to c = q with 4-point Lagrange weights.
    """
    n, h = grid.n_points, grid.h
    m = np.arange(-(n - 1), n)
    t = (np.asarray(q_eval, float)[:, None] - grid.q_min) / h + m[None, :] / 2
    base = np.floor(t + 1e-12)
    u = t - base
    W = _lagrange4(u)                                  # (Nq, M, 4)
    i = base[..., None].astype(int) + np.arange(-1, 3)  # (Nq, M, 4)
    j = i - m[None, :, None]
    valid = (i >= 0) & (i < n) & (j >= 0) & (j < n)
    W = np.where(valid, W, 0.0)
    return m, np.clip(i, 0, n - 1), np.clip(j, 0, n - 1), W


def _fourier_lines(lines: np.ndarray, m: np.ndarray, p_grid, h: float, hbar: float):
    phase = np.outer(m * h, np.asarray(p_grid, float)) / hbar
    re_ = h * lines @ np.cos(phase)
    im_ = -h * lines @ np.sin(phase)
    return re_, im_


def weyl_transform_numeric(kernel: np.ndarray, grid: GridSpec, p_grid, hbar: float = 1.0,
                           q_eval=None) -> WignerTable:
    """A_W(q, p) = int <q + y/2|A|q - y/2> e^{-i y p / hbar} dy from a grid kernel."""
    _check_nyquist(p_grid, grid.h, hbar)
    q_eval = grid.points if q_eval is None else np.atleast_1d(np.asarray(q_eval, float))
    K = np.asarray(kernel)
    m, i, j, W = _diagonal_stencil(grid, q_eval)
    lines = np.sum(W * K[i, j], axis=-1)
    re_, im_ = _fourier_lines(lines, m, p_grid, grid.h, hbar)
    vals = re_ if np.max(np.abs(im_), initial=0.0) <= 1e-10 * max(1.0, np.max(np.abs(re_))) else re_ + 1j * im_
    return WignerTable(q_eval, np.asarray(p_grid, float), vals, "weyl_symbol", hbar)


def mode_symbols(spec: SpectralDecomposition, q_eval, p_grid, modes=None) -> np.ndarray:
    """Weyl symbols of |n><n| for the requested modes, shape (n_modes, Nq, Np)."""
    grid, hbar = spec.grid, spec.hbar
    _check_nyquist(p_grid, grid.h, hbar)
    q_eval = np.atleast_1d(np.asarray(q_eval, float))
    modes = range(spec.n_modes) if modes is None else modes
    m, i, j, W = _diagonal_stencil(grid, q_eval)
    out = []
    for n in modes:
        psi = spec.eigenvectors[:, n]
        lines = np.sum(W * psi[i] * psi[j], axis=-1)
        re_, _ = _fourier_lines(lines, m, p_grid, grid.h, hbar)
        out.append(re_)
    return np.array(out)


def localized_mode_sum(spec: SpectralDecomposition, sigma: float | None = None, q_eval=None, p_grid=None,
                       weights=None, kind: str = "heat") -> WignerTable:
    """sum_n weight_n * (Weyl symbol of |n><n|).

    ``kind="heat"`` uses e^{-lambda_n sigma}; ``kind="green"`` uses 1/lambda_n;
    explicit ``weights`` override both.
    """
    lam = spec.eigenvalues
    if weights is None:
        if kind == "heat":
            if sigma is None or sigma <= 0:
                raise ValueError("heat weights need sigma > 0")
            weights = np.exp(-lam * sigma)
        elif kind == "green":
            if np.any(lam <= 0):
                raise ValueError("green weights need a positive spectrum")
            weights = 1.0 / lam
        else:
            raise ValueError(f"unknown weight kind {kind!r}")
    weights = np.asarray(weights, float)
    if weights.shape != lam.shape:
        raise ValueError("need one weight per retained mode")
    q_eval = spec.grid.points if q_eval is None else q_eval
    if p_grid is None:
        p_grid = np.array([0.0])
    syms = mode_symbols(spec, q_eval, p_grid)
    vals = np.tensordot(weights, syms, axes=1)
    # |symbol of a pure state| <= 2
    tail = 2.0 * abs(weights[-1])
    return WignerTable(np.atleast_1d(np.asarray(q_eval, float)), np.asarray(p_grid, float), vals,
                       "weyl_symbol", spec.hbar, tail, {"kind": kind, "sigma": sigma})


def choose_grid(v: PotentialSpec, n_modes: int, h: float, half_width: float = 5.0, hbar: float = 1.0,
                kinetic: str = "sinc", tol: float = 1e-8, max_half_width: float = 200.0) -> GridSpec:
    """Grow a symmetric box (or [q0, q0 + L] for q > 0 families) until lambda_{n_modes-1} settles."""
    last = None
    L = half_width
    while L <= max_half_width:
        if v.is_polynomial:
            grid = GridSpec(-L, L, int(round(2 * L / h)) + 1)
        else:
            grid = GridSpec(h, 2 * L, int(round(2 * L / h)))
        if grid.n_points < n_modes:
            L *= 1.25
            continue
        lam = solve(v, grid, n_modes, hbar, kinetic).eigenvalues[-1]
        if last is not None and abs(lam - last) <= tol * max(1.0, abs(lam)):
            return grid
        last = lam
        L *= 1.25
    raise ConvergenceError("box did not converge within max_half_width")

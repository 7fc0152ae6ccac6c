"""Radial discretization of L = -Laplacian - lambda/|x|^2 on the unit ball.

After the substitution v = r^((n-1)/2) u the radial eigenproblem becomes a
one-dimensional Dirichlet problem on (0, 1),

    -v'' - lam_red / r^2 v = mu v,      lam_red = lambda - (n-1)(n-3)/4,

whose exact eigenvalues are squared Bessel zeros j_{nu,k}^2 with
nu = sqrt(lambda_star(n) - lambda).  A uniform grid with implicit zero
ghost values at r = 0 and r = 1 keeps the singular potential off the
origin; second-order convergence holds for lambda = 0 and degrades
gracefully (order ~ 2*nu) for singular couplings.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import SupercriticalCouplingError

EIGEN_RESIDUAL_TOL = 1e-10  # relative to ||A||, per eigenpair


def critical_constant(n: int) -> float:
    """Critical Hardy coupling (n-2)^2/4; n = 2 has no Hardy inequality."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    if n == 2:
        raise ValueError("n = 2 excluded: the critical constant degenerates")
    return (n - 2) ** 2 / 4.0


def bessel_order(lam: float, n: int) -> float:
    """Order nu = sqrt(lambda_star(n) - lambda) of the radial Bessel oracle."""
    lam_star = critical_constant(n)
    if lam >= lam_star:
        raise SupercriticalCouplingError(lam, lam_star, n)
    return float(np.sqrt(lam_star - lam))


def reduced_coupling(lam: float, n: int) -> float:
    """Effective 1-D inverse-square coupling after the radial reduction."""
    return lam - (n - 1) * (n - 3) / 4.0


@dataclass
class RadialGrid:
    """Uniform interior grid r_j = j*h on (0, 1), h = 1/(n_interior + 1).

    Dirichlet values at r = 0 and r = 1 are implicit zeros; quadrature is
    the trapezoid rule, which reduces to weight h at every interior node.
    """

    n_interior: int
    spacing: float = field(init=False)
    nodes: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n_interior < 1:
            raise ValueError("n_interior must be positive")
        self.spacing = 1.0 / (self.n_interior + 1)
        self.nodes = self.spacing * np.arange(1, self.n_interior + 1)
        self.weights = np.full(self.n_interior, self.spacing)

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Quadrature inner product <u, v> = h * sum u conj(v)."""
        return self.spacing * np.vdot(v, u)

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(self.spacing) * np.linalg.norm(u))


@dataclass
class HardyDiscretization:
    """Symmetric tridiagonal matrix of -d^2/dr^2 - lam_red/r^2, Dirichlet ends."""

    grid: RadialGrid
    lam: float
    dimension_n: int
    diagonal: np.ndarray
    offdiagonal: np.ndarray
    bessel_order: float

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.offdiagonal * v[1:]
        out[1:] += self.offdiagonal * v[:-1]
        return out

    def norm_estimate(self) -> float:
        """Infinity-norm bound, enough to scale eigenresidual tolerances."""
        pad = np.concatenate(([0.0], np.abs(self.offdiagonal), [0.0]))
        return float(np.max(np.abs(self.diagonal) + pad[:-1] + pad[1:]))


def assemble_hardy_operator(grid: RadialGrid, lam: float, n: int = 3) -> HardyDiscretization:
    """Three-point discretization of the reduced radial operator."""
    if grid.n_interior < 8:
        raise ValueError("grid too small: need at least 8 interior nodes")
    nu = bessel_order(lam, n)  # validates subcriticality
    lam_red = reduced_coupling(lam, n)
    h = grid.spacing
    diag = 2.0 / h**2 - lam_red / grid.nodes**2
    off = np.full(grid.n_interior - 1, -1.0 / h**2)
    return HardyDiscretization(grid, lam, n, diag, off, nu)


@dataclass
class SpectralBasis:
    """Ascending eigenvalues with quadrature-orthonormal eigenvectors.

    Sign convention: the first component above 1e-12 * max|v| is positive.
    """

    grid: RadialGrid
    eigenvalues: np.ndarray      # (k_modes,)
    eigenvectors: np.ndarray     # (n_interior, k_modes)
    lam: float
    dimension_n: int
    bessel_order: float

    @property
    def k_modes(self) -> int:
        return len(self.eigenvalues)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        if len(idx) and col[idx[0]] < 0:
            out[:, k] = -col
    return out


def solve_spectrum(op: HardyDiscretization, k_modes: int) -> SpectralBasis:
    """Lowest k_modes eigenpairs of the tridiagonal discretization."""
    n = op.grid.n_interior
    if k_modes > n:
        raise ValueError(f"k_modes = {k_modes} exceeds matrix size {n}")
    vals, vecs = eigh_tridiagonal(
        op.diagonal, op.offdiagonal, select="i", select_range=(0, k_modes - 1)
    )
    # Euclidean-orthonormal -> orthonormal under the h-weighted quadrature
    vecs = vecs / np.sqrt(op.grid.spacing)
    vecs = _fix_signs(vecs)
    a_norm = op.norm_estimate()
    for k in range(k_modes):
        res = np.linalg.norm(op.apply(vecs[:, k]) - vals[k] * vecs[:, k])
        if res > EIGEN_RESIDUAL_TOL * a_norm * np.linalg.norm(vecs[:, k]):
            raise RuntimeError(f"eigenpair {k} residual {res:.3e} exceeds tolerance")
    return SpectralBasis(op.grid, vals, vecs, op.lam, op.dimension_n, op.bessel_order)


def hardy_rayleigh(grid: RadialGrid, v: np.ndarray) -> float:
    """Discrete Hardy quotient sum((dv/h)^2 h) / sum((v/r)^2 h), v Dirichlet-padded."""
    v = np.asarray(v, dtype=float)
    if v.shape != grid.nodes.shape:
        raise ValueError("vector does not match the grid")
    den = np.sum((v / grid.nodes) ** 2) * grid.spacing
    if den == 0.0:
        raise ValueError("degenerate input: zero vector")
    padded = np.concatenate(([0.0], v, [0.0]))
    num = np.sum((np.diff(padded) / grid.spacing) ** 2) * grid.spacing
    return float(num / den)


def hardy_pencil_infimum(grid: RadialGrid) -> float:
    """Infimum of the Hardy quotient over the grid: smallest generalized
    eigenvalue of (stiffness, diag(1/r^2)), computed from the congruent
    symmetric tridiagonal diag(r) A diag(r)."""
    h = grid.spacing
    r = grid.nodes
    diag = 2.0 * r**2 / h**2
    off = -(r[:-1] * r[1:]) / h**2
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0), eigvals_only=True)
    return float(vals[0])


def bessel_oracle_table(basis: SpectralBasis, k_check: int | None = None) -> np.ndarray:
    """Rows (k, mu_k, j_{nu,k}^2, rel_err) comparing FD eigenvalues to the oracle."""
    from .bessel import bessel_zeros

    k_check = basis.k_modes if k_check is None else min(k_check, basis.k_modes)
    zeros = bessel_zeros(basis.bessel_order, k_check)
    mu = basis.eigenvalues[:k_check]
    oracle = zeros**2
    rel = np.abs(mu - oracle) / oracle
    return np.column_stack([np.arange(1, k_check + 1), mu, oracle, rel])

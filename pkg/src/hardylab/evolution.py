"""Time evolution in the spectral basis and observation on subdomains.

The source-free flow is diagonal: c_k(t) = exp(i mu_k t) c_k(0).  Sourced
problems are integrated by Duhamel's formula with trapezoid quadrature,

    c_k(t) = -i integral_0^t exp(i mu_k (t-s)) g_k(s) ds,

accumulated panel by panel so the cost is linear in the number of steps and
the result coincides with the global composite trapezoid rule.
"""

from dataclasses import dataclass, field

import numpy as np

from .spectral import RadialGrid, SpectralBasis


@dataclass
class TimeGrid:
    """Uniform grid t_j = j*T/steps, j = 0..steps."""

    horizon: float
    steps: int
    times: np.ndarray = field(init=False)
    dt: float = field(init=False)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.steps < 1:
            raise ValueError("need at least one step")
        self.dt = self.horizon / self.steps
        self.times = self.dt * np.arange(self.steps + 1)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.steps + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w


@dataclass
class ModeState:
    """Spectral coefficients of a solution at one time instant."""

    coeffs: np.ndarray
    time: float = 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass
class ModeTrajectory:
    """Coefficients on a time grid; row j is the state at t_j."""

    times: np.ndarray
    coeffs: np.ndarray  # (len(times), k_modes)

    @property
    def k_modes(self) -> int:
        return self.coeffs.shape[1]

    def state(self, j: int) -> ModeState:
        return ModeState(self.coeffs[j].copy(), float(self.times[j]))


@dataclass
class SourceModel:
    """Separable source f(x) rho(t): spatial modes plus sampled amplitude."""

    f_modes: np.ndarray
    rho: np.ndarray        # samples on the driving TimeGrid
    rho_at_zero: float

    @classmethod
    def from_callable(cls, f_modes, rho_fn, grid: TimeGrid) -> "SourceModel":
        rho = np.array([rho_fn(t) for t in grid.times], dtype=float)
        return cls(np.asarray(f_modes, dtype=complex), rho, float(rho[0]))


def propagate(state: ModeState, basis: SpectralBasis, t: float) -> ModeState:
    """Apply the exact phases exp(i mu_k t)."""
    phases = np.exp(1j * basis.eigenvalues * t)
    return ModeState(state.coeffs * phases, state.time + t)


def duhamel_modal_source(g: np.ndarray, mus: np.ndarray, grid: TimeGrid) -> ModeTrajectory:
    """Zero-initial-state response to a per-mode source g_k(t_j).

    g has shape (steps+1, k); the recursion keeps every partial integral
    equal to the composite trapezoid value at that time.
    """
    steps, k = grid.steps, g.shape[1]
    if g.shape[0] != steps + 1:
        raise ValueError("source samples do not match the time grid")
    phase = np.exp(1j * np.asarray(mus) * grid.dt)
    acc = np.zeros(k, dtype=complex)
    coeffs = np.zeros((steps + 1, k), dtype=complex)
    half = 0.5 * grid.dt
    for j in range(steps):
        acc = phase * acc + half * (phase * g[j] + g[j + 1])
        coeffs[j + 1] = -1j * acc
    return ModeTrajectory(grid.times.copy(), coeffs)


def duhamel_solve(src: SourceModel, basis: SpectralBasis, grid: TimeGrid) -> ModeTrajectory:
    """Trajectory of the separably-sourced problem with u(0) = 0."""
    g = np.outer(src.rho, src.f_modes)
    return duhamel_modal_source(g, basis.eigenvalues, grid)


def free_trajectory(c0: np.ndarray, basis: SpectralBasis, grid: TimeGrid) -> ModeTrajectory:
    """Source-free flow of an initial state sampled on the grid."""
    phases = np.exp(1j * np.outer(grid.times, basis.eigenvalues))
    return ModeTrajectory(grid.times.copy(), phases * np.asarray(c0, dtype=complex))


@dataclass
class ObservationMask:
    """Observation subset of (0, 1): interval or fat-Cantor node selection."""

    kind: str
    node_indices: np.ndarray
    weights: np.ndarray
    intervals: list[tuple[float, float]]
    analytic_measure: float
    unit_measure_limit: float | None = None
    depth: int | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_indices)

    def realized_measure(self) -> float:
        return float(self.weights.sum())


def interval_mask(grid: RadialGrid, a: float, b: float) -> ObservationMask:
    """Open-interval observation set (a, b) restricted to grid nodes."""
    if not (0.0 <= a < b <= 1.0):
        raise ValueError(f"invalid interval ({a}, {b})")
    idx = np.flatnonzero((grid.nodes > a) & (grid.nodes < b))
    if len(idx) == 0:
        raise ValueError("interval contains no grid nodes")
    return ObservationMask(
        kind="interval",
        node_indices=idx,
        weights=grid.weights[idx],
        intervals=[(a, b)],
        analytic_measure=b - a,
    )


def fat_cantor_mask(grid: RadialGrid, base_interval: tuple[float, float] = (0.0, 1.0)) -> ObservationMask:
    """Positive-measure nowhere-dense mask by the middle-removal construction.

    Stage k removes an open middle piece of length L * 4^-(k+1) from each of
    the 2^k current intervals (L = base length); the depth is
    ceil(log2 n_interior).  On the unit interval the removed total telescopes
    to sum_k 2^k 4^-(k+1) = 1/2, so the limiting measure is 1/2 and the
    depth-d construction keeps 1/2 + 2^-(d+1).
    """
    a, b = base_interval
    if not (0.0 <= a < b <= 1.0):
        raise ValueError(f"invalid base interval ({a}, {b})")
    length = b - a
    if length < 4 * grid.spacing:
        raise ValueError("base interval shorter than 4 grid spacings")
    depth = int(np.ceil(np.log2(grid.n_interior)))
    intervals = [(a, b)]
    for k in range(depth):
        removed = length * 4.0 ** (-(k + 1))
        nxt = []
        for lo, hi in intervals:
            mid = 0.5 * (lo + hi)
            nxt.append((lo, mid - 0.5 * removed))
            nxt.append((mid + 0.5 * removed, hi))
        intervals = nxt
    keep = np.zeros(grid.n_interior, dtype=bool)
    for lo, hi in intervals:
        keep |= (grid.nodes >= lo) & (grid.nodes <= hi)
    idx = np.flatnonzero(keep)
    if len(idx) == 0:
        raise ValueError("fat-Cantor mask contains no grid nodes")
    analytic = length * (0.5 + 2.0 ** (-(depth + 1)))
    return ObservationMask(
        kind="cantor",
        node_indices=idx,
        weights=grid.weights[idx],
        intervals=intervals,
        analytic_measure=analytic,
        unit_measure_limit=0.5,
        depth=depth,
    )


def observe(trajectory: ModeTrajectory, mask: ObservationMask, basis: SpectralBasis) -> np.ndarray:
    """Physical-space samples u(t_j, r_m) on the masked nodes, (times, nodes)."""
    if mask.n_nodes == 0:
        raise ValueError("empty observation mask")
    phi = basis.eigenvectors[mask.node_indices, :]  # (n_mask, k)
    return trajectory.coeffs @ phi.T


@dataclass
class ObservabilityReport:
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int


def observability_matrix(basis: SpectralBasis, mask: ObservationMask, grid: TimeGrid) -> ObservabilityReport:
    """Map from initial coefficients to space-time samples on (0,T) x mask.

    Rows carry sqrt(time weight * node weight) so singular values mimic the
    continuous L^2((0,T) x omega) observation norm; the smallest one is the
    truncation-level injectivity margin.
    """
    n_rows = (grid.steps + 1) * mask.n_nodes
    if basis.k_modes > n_rows:
        raise ValueError("fewer samples than modes: observation map cannot be injective")
    phases = np.exp(1j * np.outer(grid.times, basis.eigenvalues))  # (nt, k)
    phi = basis.eigenvectors[mask.node_indices, :]                 # (nm, k)
    m = phases[:, None, :] * phi[None, :, :]                       # (nt, nm, k)
    w = np.sqrt(np.outer(grid.trapezoid_weights(), mask.weights))  # (nt, nm)
    m = m * w[:, :, None]
    m = m.reshape(n_rows, basis.k_modes)
    if not np.all(np.abs(m).max(axis=0) > 0):
        raise ValueError("degenerate all-zero column: basis/mask inconsistency")
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.linalg.matrix_rank(m))
    return ObservabilityReport(m, s, rank)

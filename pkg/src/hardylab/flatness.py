"""Smooth boundary-control kernel built from a Gevrey bump by a power series.

The kernel solves i dK/dtau - d^2K/dt^2 = 0 on [-1,1] x [0,T] with
K(-1, tau) = psi(tau) and K(., 0) = K(., T) = 0, via the even flat ansatz

    K(t, tau) = sum_{k=0}^{K_trunc} i^k psi^(k)(tau) (t+1)^(2k) / (2k)!.

Truncation leaves the single telescoping defect
i^(K+1) psi^(K+1)(tau) (t+1)^(2K) / (2K)!, which doubles as an exact
residual oracle.  psi is the normalized bump

    psi(tau) = exp(c_T - (tau (T - tau))^-sigma),   c_T = (4/T^2)^sigma,

whose derivatives are produced by trapezoid Cauchy integrals on circles of
radius min(tau, T-tau)/2; the product tau(T-tau) keeps a positive real part
there, so the principal branch is safe for non-integer sigma.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MAX_TRUNCATION = 40
MIN_CONTOUR_RADIUS = 1e-3


@dataclass
class GevreyBump:
    """Compactly supported bump on (0, T), normalized to peak value 1."""

    horizon: float
    sigma: float
    c_norm: float

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        inside = (tau > 0.0) & (tau < self.horizon)
        w = tau[inside] * (self.horizon - tau[inside])
        # w^-sigma may overflow right at the support edge; exp then
        # underflows to the correct 0
        with np.errstate(over="ignore"):
            out[inside] = np.exp(self.c_norm - w ** (-self.sigma))
        return out if out.ndim else float(out)

    def eval_complex(self, z: np.ndarray) -> np.ndarray:
        # no support cutoff: used only on contours strictly inside (0, T)
        w = z * (self.horizon - z)
        return np.exp(self.c_norm - w ** (-self.sigma))


def gevrey_bump(horizon: float, sigma: float = 2.0) -> GevreyBump:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    c = (4.0 / horizon**2) ** sigma
    return GevreyBump(horizon, sigma, c)


def cauchy_derivatives(bump: GevreyBump, tau: float, k_max: int, contour_nodes: int | None = None) -> np.ndarray:
    """psi^(k)(tau) for k = 0..k_max from one contour of trapezoid averages."""
    table = derivative_table(bump, np.array([tau]), k_max, contour_nodes)
    return table[0]


def derivative_table(bump: GevreyBump, taus: np.ndarray, k_max: int, contour_nodes: int | None = None) -> np.ndarray:
    """Derivative rows psi^(k)(tau_j); endpoints and exterior points are 0.

    Interior points need radius r = min(tau, T-tau)/2 >= 1e-3; the node
    count must exceed 4*k_max to keep aliasing out of the top orders.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    t_end = bump.horizon
    m = contour_nodes or max(256, 4 * (k_max + 1))
    if m < 4 * k_max:
        raise ValueError("need at least 4*k_max contour nodes")
    interior = (taus > 0.0) & (taus < t_end)
    r = 0.5 * np.minimum(taus, t_end - taus)
    tight = interior & (r < MIN_CONTOUR_RADIUS)
    if np.any(tight):
        # inside the guard band the row is kept only if the bump (and hence
        # every derivative reachable in float64) has underflowed to zero
        with np.errstate(over="ignore"):
            expo = bump.c_norm - (taus[tight] * (t_end - taus[tight])) ** (-bump.sigma)
        if np.any(expo > -1000.0):
            raise ValueError("tau too close to the support endpoints (radius < 1e-3)")
        interior = interior & ~tight
    table = np.zeros((len(taus), k_max + 1))
    if not np.any(interior):
        return table
    theta = 2.0 * np.pi * np.arange(m) / m
    ks = np.arange(k_max + 1)
    z = taus[interior, None] + r[interior, None] * np.exp(1j * theta)[None, :]
    vals = bump.eval_complex(z)                       # (n_int, m)
    basis = np.exp(-1j * np.outer(theta, ks))         # (m, k_max+1)
    avg = (vals @ basis) / m
    fact = np.cumprod(np.concatenate(([1.0], np.arange(1.0, k_max + 1))))
    table[interior] = avg.real * fact[None, :] / r[interior, None] ** ks[None, :]
    return table


def bump_derivatives_exact(bump: GevreyBump, tau, k_max: int) -> np.ndarray:
    """Independent oracle: psi^(k) = R_k(1/tau, 1/(T-tau)) * psi with the
    polynomial recurrence R_{k+1} = R_k' + R_k * E', run in exact rational
    arithmetic.  Requires integer sigma; tau may be a Fraction for exactness.
    """
    sigma = bump.sigma
    if sigma != int(sigma):
        raise ValueError("exact recurrence requires integer sigma")
    sigma = int(sigma)
    t_end = Fraction(bump.horizon)
    tau = Fraction(tau)
    if not 0 < tau < t_end:
        raise ValueError("tau must be interior to (0, T)")

    # monomials u^a w^b with u = 1/tau, w = 1/(T-tau):
    # d/dtau u = -u^2, d/dtau w = w^2
    def differentiate(poly):
        out = {}
        for (a, b), c in poly.items():
            if a:
                key = (a + 1, b)
                out[key] = out.get(key, Fraction(0)) - a * c
            if b:
                key = (a, b + 1)
                out[key] = out.get(key, Fraction(0)) + b * c
        return out

    def add_product(poly, other, acc):
        for (a1, b1), c1 in poly.items():
            for (a2, b2), c2 in other.items():
                key = (a1 + a2, b1 + b2)
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return acc

    log_deriv = {
        (sigma + 1, sigma): Fraction(sigma),
        (sigma, sigma + 1): Fraction(-sigma),
    }
    u = 1 / tau
    w = 1 / (t_end - tau)
    psi_val = float(np.exp(bump.c_norm - float((tau * (t_end - tau)) ** -sigma)))
    poly = {(0, 0): Fraction(1)}
    out = np.empty(k_max + 1)
    out[0] = psi_val
    for k in range(1, k_max + 1):
        poly = add_product(poly, log_deriv, differentiate(poly))
        value = sum(c * u**a * w**b for (a, b), c in poly.items())
        out[k] = float(value) * psi_val
    return out


def _even_power_factors(t, k_trunc: int) -> np.ndarray:
    """(t+1)^(2k)/(2k)! for k = 0..k_trunc by ratio accumulation."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    fac = np.empty((k_trunc + 1, len(t)))
    fac[0] = 1.0
    base = (t + 1.0) ** 2
    for k in range(1, k_trunc + 1):
        fac[k] = fac[k - 1] * base / ((2 * k - 1) * (2 * k))
    return fac


def kernel_eval(bump: GevreyBump, t: float, tau: float, k_trunc: int,
                deriv_row: np.ndarray | None = None) -> complex:
    """Point value of the truncated kernel series."""
    if k_trunc > MAX_TRUNCATION:
        raise ValueError(f"k_trunc {k_trunc} exceeds cap {MAX_TRUNCATION}")
    if deriv_row is None:
        deriv_row = derivative_table(bump, np.array([tau]), k_trunc)[0]
    fac = _even_power_factors(t, k_trunc)[:, 0]
    val = complex(np.sum((1j ** np.arange(k_trunc + 1)) * deriv_row[: k_trunc + 1] * fac))
    if not np.isfinite(val.real) or not np.isfinite(val.imag):
        raise FloatingPointError("non-finite kernel term: truncation misuse")
    return val


@dataclass
class FlatnessKernel:
    """Kernel samples on a (t, tau) grid plus the derivative table behind them."""

    bump: GevreyBump
    k_trunc: int
    t_nodes: np.ndarray
    tau_nodes: np.ndarray
    values: np.ndarray          # (len(t_nodes), len(tau_nodes)) complex
    deriv_table: np.ndarray     # (len(tau_nodes), k_trunc + 2)

    def tau_weights(self) -> np.ndarray:
        dt = self.tau_nodes[1] - self.tau_nodes[0]
        w = np.full(len(self.tau_nodes), dt)
        w[0] = w[-1] = 0.5 * dt
        return w


def build_kernel(bump: GevreyBump, t_nodes: np.ndarray, tau_nodes: np.ndarray,
                 k_trunc: int) -> FlatnessKernel:
    """Assemble kernel values column-by-column from the derivative table.

    The table is computed one order past the truncation so the residual and
    the tau-derivative of the series are available exactly.
    """
    if k_trunc > MAX_TRUNCATION:
        raise ValueError(f"k_trunc {k_trunc} exceeds cap {MAX_TRUNCATION}")
    t_nodes = np.asarray(t_nodes, dtype=float)
    tau_nodes = np.asarray(tau_nodes, dtype=float)
    table = derivative_table(bump, tau_nodes, k_trunc + 1)
    fac = _even_power_factors(t_nodes, k_trunc)       # (k+1, nt)
    powers = (1j ** np.arange(k_trunc + 1))
    values = np.zeros((len(t_nodes), len(tau_nodes)), dtype=complex)
    for k in range(k_trunc + 1):
        values += np.outer(powers[k] * fac[k], table[:, k])
    if not np.all(np.isfinite(values.view(float))):
        raise FloatingPointError("non-finite kernel term: truncation misuse")
    return FlatnessKernel(bump, k_trunc, t_nodes, tau_nodes, values, table)


@dataclass
class KernelResidualReport:
    max_residual: float
    max_kernel: float
    max_tail: float
    tail_match_error: float
    residual: np.ndarray   # (nt, ntau)
    tail: np.ndarray       # (nt, ntau)


def kernel_residual(kernel: FlatnessKernel) -> KernelResidualReport:
    """Residual of i dK/dtau - d^2K/dt^2 on the evaluation grid.

    The tau derivative reuses the Cauchy table shifted by one order; the t
    derivative differentiates the even series exactly.  Their mismatch
    against the one-term telescoping tail is floating-point noise, reported
    as tail_match_error.
    """
    kt = kernel.k_trunc
    table = kernel.deriv_table
    fac = _even_power_factors(kernel.t_nodes, kt)
    powers = 1j ** np.arange(kt + 2)
    nt, ntau = kernel.values.shape
    dtau_series = np.zeros((nt, ntau), dtype=complex)
    for k in range(kt + 1):
        dtau_series += np.outer(powers[k] * fac[k], table[:, k + 1])
    dtt_series = np.zeros((nt, ntau), dtype=complex)
    for k in range(1, kt + 1):
        dtt_series += np.outer(powers[k] * fac[k - 1], table[:, k])
    residual = 1j * dtau_series - dtt_series
    tail = np.outer(powers[kt + 1] * fac[kt], table[:, kt + 1])
    max_kernel = float(np.abs(kernel.values).max())
    return KernelResidualReport(
        max_residual=float(np.abs(residual).max()),
        max_kernel=max_kernel,
        max_tail=float(np.abs(tail).max()),
        tail_match_error=float(np.abs(residual - tail).max()),
        residual=residual,
        tail=tail,
    )


def control_trace(kernel: FlatnessKernel) -> np.ndarray:
    """Boundary control v(tau) = K(1, tau) implied by the construction."""
    idx = int(np.argmin(np.abs(kernel.t_nodes - 1.0)))
    if abs(kernel.t_nodes[idx] - 1.0) > 1e-12:
        fac = _even_power_factors(np.array([1.0]), kernel.k_trunc)[:, 0]
        powers = 1j ** np.arange(kernel.k_trunc + 1)
        return (kernel.deriv_table[:, : kernel.k_trunc + 1] * (powers * fac)).sum(axis=1)
    return kernel.values[idx].copy()

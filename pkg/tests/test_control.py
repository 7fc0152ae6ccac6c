import numpy as np
import pytest

from hardylab.control import (defect_curve, gramian, hum_solve, verify_control,
                              verify_control_trajectory)
from hardylab.evolution import ModeState, TimeGrid, interval_mask, propagate
from hardylab.spectral import RadialGrid, assemble_hardy_operator, solve_spectrum


def make_basis(n=400, lam=3 / 16, k=8):
    grid = RadialGrid(n)
    return solve_spectrum(assemble_hardy_operator(grid, lam, 3), k)


@pytest.fixture(scope="module")
def basis():
    return make_basis()


@pytest.fixture(scope="module")
def gram(basis):
    return gramian(basis, interval_mask(basis.grid, 0.3, 0.6), 1.0)


def random_states(k, seed=0):
    rng = np.random.default_rng(seed)
    u0 = ModeState(rng.standard_normal(k) + 1j * rng.standard_normal(k))
    ud = ModeState(rng.standard_normal(k) + 1j * rng.standard_normal(k))
    return u0, ud


def test_single_mode_gramian_value(basis):
    b1 = make_basis(k=1)
    mask = interval_mask(b1.grid, 0.3, 0.6)
    g = gramian(b1, mask, 1.0)
    phi = b1.eigenvectors[mask.node_indices, 0]
    expected = 1.0 * np.sum(mask.weights * phi**2)
    assert g.matrix[0, 0] == pytest.approx(expected, rel=1e-14)


def test_full_mask_gramian_reduces_to_horizon_identity(basis):
    # Parseval: the full-domain mass matrix is the identity, so the Hadamard
    # structure G = M . eta collapses to eta(0, T) I = T I
    horizon = 0.7
    mask = interval_mask(basis.grid, 0.0, 1.0)
    g = gramian(basis, mask, horizon)
    assert np.abs(g.mass_masked - np.eye(8)).max() <= 1e-10
    assert np.abs(g.matrix - horizon * np.eye(8)).max() <= 1e-10


def test_gramian_hermitian_psd_positive(gram):
    m = gram.matrix
    assert np.abs(m - m.conj().T).max() <= 1e-14
    eigs = np.linalg.eigvalsh(m)
    assert eigs[0] > 0  # strictly positive for an open-interval mask


def test_gramian_empty_mask_rejected(basis):
    mask = interval_mask(basis.grid, 0.3, 0.6)
    mask.node_indices = np.array([], dtype=int)
    mask.weights = np.array([])
    with pytest.raises(ValueError, match="empty"):
        gramian(basis, mask, 1.0)


def test_hum_zero_gap(gram, basis):
    u0 = ModeState(np.ones(8, dtype=complex))
    ud = propagate(u0, basis, 1.0)
    res = hum_solve(gram, u0, ud, 1e-4)
    assert np.abs(res.multiplier).max() <= 1e-12
    assert res.defect_predicted <= 1e-12


def test_hum_large_penalty_limit(gram):
    u0, ud = random_states(8)
    res = hum_solve(gram, u0, ud, 1e9)
    d = np.linalg.norm(res.target_gap)
    assert res.defect_predicted == pytest.approx(d, rel=1e-8)
    assert np.abs(res.multiplier).max() <= 2 * d / 1e9


def test_hum_defect_bound(gram):
    u0, ud = random_states(8, seed=4)
    eps = 1e-3
    res = hum_solve(gram, u0, ud, eps)
    smin = gram.sigma_min()
    assert res.defect_predicted <= eps / (eps + smin) * np.linalg.norm(res.target_gap) + 1e-12


def test_hum_linearity_in_gap(gram, basis):
    u0, ud = random_states(8, seed=5)
    res1 = hum_solve(gram, u0, ud, 1e-2)
    doubled = ModeState(2 * ud.coeffs - np.exp(1j * basis.eigenvalues) * u0.coeffs)
    res2 = hum_solve(gram, u0, doubled, 1e-2)
    assert np.abs(res2.multiplier - 2 * res1.multiplier).max() <= 1e-10
    assert res2.defect_predicted == pytest.approx(2 * res1.defect_predicted, rel=1e-12)


def test_hum_rejects_nonpositive_penalty(gram):
    u0, ud = random_states(8)
    with pytest.raises(ValueError):
        hum_solve(gram, u0, ud, 0.0)


def test_forward_simulation_matches_predicted_defect(gram):
    u0, ud = random_states(8, seed=6)
    res = hum_solve(gram, u0, ud, 1e-3)
    fwd = verify_control(res, gram, u0, n_steps=100_000)
    assert abs(fwd - res.defect_predicted) <= 1e-6


def test_forward_error_second_order(gram):
    u0, ud = random_states(8, seed=7)
    res = hum_solve(gram, u0, ud, 1e-2)
    e1 = abs(verify_control(res, gram, u0, n_steps=4000) - res.defect_predicted)
    e2 = abs(verify_control(res, gram, u0, n_steps=8000) - res.defect_predicted)
    assert e1 / e2 == pytest.approx(4.0, rel=0.35)


def test_zero_control_trajectory_is_free_flow(gram, basis):
    u0 = ModeState(np.ones(8, dtype=complex))
    res = hum_solve(gram, u0, propagate(u0, basis, 1.0), 1e-4)  # q ~ 0
    grid = TimeGrid(1.0, 64)
    traj = verify_control_trajectory(res, gram, u0, grid)
    free = np.exp(1j * np.outer(grid.times, basis.eigenvalues)) * u0.coeffs
    assert np.abs(traj - free).max() <= 1e-10


def test_defect_curve_monotonicity(gram):
    u0, ud = random_states(8, seed=8)
    rows = defect_curve(gram, u0, ud, (1e-1, 1e-2, 1e-3, 1e-4, 1e-5))
    defects = [r["defect"] for r in rows]
    costs = [r["cost"] for r in rows]
    assert all(a > b for a, b in zip(defects, defects[1:]))
    assert all(b >= a for a, b in zip(costs, costs[1:]))
    assert costs[-1] > costs[0]


def test_defect_curve_single_mode_scalar_formula():
    b1 = make_basis(k=1)
    mask = interval_mask(b1.grid, 0.3, 0.6)
    g = gramian(b1, mask, 1.0)
    u0, ud = random_states(1, seed=9)
    eps = 1e-3
    res = hum_solve(g, u0, ud, eps)
    d = abs(res.target_gap[0])
    expected = eps * d / (eps + g.matrix[0, 0].real)
    assert res.defect_predicted == pytest.approx(expected, rel=1e-12)


def test_defect_curve_rejects_nondecreasing(gram):
    u0, ud = random_states(8)
    with pytest.raises(ValueError, match="decreasing"):
        defect_curve(gram, u0, ud, (1e-3, 1e-2))


def test_mask_monotonicity(basis):
    small = gramian(basis, interval_mask(basis.grid, 0.3, 0.6), 1.0)
    large = gramian(basis, interval_mask(basis.grid, 0.25, 0.65), 1.0)
    assert large.sigma_min() >= small.sigma_min() - 1e-12

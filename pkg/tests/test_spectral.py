import numpy as np
import pytest

from hardylab.bessel import bessel_zeros
from hardylab.errors import SupercriticalCouplingError
from hardylab.spectral import (RadialGrid, assemble_hardy_operator, bessel_order,
                               critical_constant, hardy_pencil_infimum,
                               hardy_rayleigh, solve_spectrum)


def make_basis(n, lam, k, dim=3):
    grid = RadialGrid(n)
    return solve_spectrum(assemble_hardy_operator(grid, lam, dim), k)


def test_critical_constant_values():
    assert critical_constant(3) == 0.25
    assert critical_constant(1) == 0.25
    assert critical_constant(4) == 1.0


def test_critical_constant_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        critical_constant(2)
    with pytest.raises(ValueError):
        critical_constant(0)


def test_bessel_order_values():
    assert bessel_order(0.0, 3) == pytest.approx(0.5)
    assert bessel_order(3 / 16, 3) == pytest.approx(0.25)
    assert bessel_order(-0.75, 3) == pytest.approx(1.0)


def test_bessel_order_rejects_supercritical():
    with pytest.raises(SupercriticalCouplingError):
        bessel_order(0.25, 3)
    with pytest.raises(SupercriticalCouplingError):
        bessel_order(0.3, 3)


def test_small_grid_rejected():
    with pytest.raises(ValueError, match="grid too small"):
        assemble_hardy_operator(RadialGrid(5), 0.0, 3)


def test_laplacian_spectrum_matches_sine_modes():
    basis = make_basis(800, 0.0, 5)
    exact = (np.arange(1, 6) * np.pi) ** 2
    ratios = basis.eigenvalues / exact
    assert np.all(ratios >= 0.995) and np.all(ratios <= 1.0)


def test_singular_spectrum_matches_bessel_oracle():
    basis = make_basis(800, 3 / 16, 3)
    oracle = bessel_zeros(0.25, 3) ** 2
    rel = np.abs(basis.eigenvalues - oracle) / oracle
    assert rel.max() <= 1e-2


def test_first_singular_eigenvalue_between_bessel_brackets():
    basis = make_basis(800, 3 / 16, 1)
    lo = bessel_zeros(0.0, 1)[0] ** 2
    hi = bessel_zeros(0.5, 1)[0] ** 2
    assert lo < basis.eigenvalues[0] < hi


def test_richardson_order_two_at_zero_coupling():
    errs = []
    for n in (200, 400, 800):
        mu1 = make_basis(n, 0.0, 1).eigenvalues[0]
        errs.append(abs(mu1 - np.pi**2))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(abs(o - 2.0) <= 0.2 for o in orders)


def test_negative_coupling_oracle():
    basis = make_basis(800, -0.75, 3)
    oracle = bessel_zeros(1.0, 3) ** 2
    rel = np.abs(basis.eigenvalues - oracle) / oracle
    assert rel.max() <= 1e-2


def test_eigen_residual_and_orthonormality():
    grid = RadialGrid(400)
    op = assemble_hardy_operator(grid, 3 / 16, 3)
    basis = solve_spectrum(op, 6)
    a_norm = op.norm_estimate()
    for k in range(6):
        v = basis.eigenvectors[:, k]
        res = np.linalg.norm(op.apply(v) - basis.eigenvalues[k] * v)
        assert res <= 1e-10 * a_norm * np.linalg.norm(v)
    gram = grid.spacing * basis.eigenvectors.T @ basis.eigenvectors
    assert np.abs(gram - np.eye(6)).max() <= 1e-10


def test_sign_convention_first_component_positive():
    basis = make_basis(128, 0.0, 4)
    for k in range(4):
        col = basis.eigenvectors[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        assert col[idx[0]] > 0


def test_coercivity_below_critical():
    for lam in (-5.0, 0.0, 0.2, 0.2499):
        basis = make_basis(256, lam, 3)
        assert np.all(basis.eigenvalues > 0)


def test_k_modes_exceeding_size_rejected():
    op = assemble_hardy_operator(RadialGrid(16), 0.0, 3)
    with pytest.raises(ValueError):
        solve_spectrum(op, 17)


def test_hardy_quotient_on_parabola():
    grid = RadialGrid(200)
    v = grid.nodes * (1 - grid.nodes)
    assert hardy_rayleigh(grid, v) >= 0.25


def test_hardy_quotient_random_sweep():
    grid = RadialGrid(200)
    rng = np.random.default_rng(7)
    for _ in range(200):
        assert hardy_rayleigh(grid, rng.standard_normal(200)) >= 0.25 - 1e-10


def test_hardy_zero_vector_rejected():
    grid = RadialGrid(64)
    with pytest.raises(ValueError, match="degenerate"):
        hardy_rayleigh(grid, np.zeros(64))


def test_pencil_infimum_above_quarter_and_decreasing():
    values = [hardy_pencil_infimum(RadialGrid(n)) for n in (100, 200, 400)]
    assert all(v > 0.25 for v in values)
    assert values[0] > values[1] > values[2]


def test_dimension_reduction_consistency():
    # n = 5 with lambda = lambda_star(5) - nu^2 must reproduce the same
    # reduced problem as n = 3 with matching Bessel order
    lam5 = critical_constant(5) - 0.25  # nu = 1/2
    b5 = make_basis(400, lam5, 3, dim=5)
    b3 = make_basis(400, 0.0, 3, dim=3)
    assert np.allclose(b5.eigenvalues, b3.eigenvalues, rtol=1e-12)

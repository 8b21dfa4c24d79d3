"""Stationary states: Newton-Krylov solver, linearization, stability report."""

import numpy as np
import pytest

from bvamx import (
    FieldPair,
    SpectralGrid,
    cosine_guess,
    newton_krylov_solve,
    regime_parameters,
    stability_spectrum,
)
from bvamx.equilibrium import (
    assemble_linearization,
    laplacian_matrix,
    residual,
    zero_state_preconditioner,
)
from bvamx.integrate import flow_map
from bvamx.model import ModelParameters, reaction_jacobian


GRID = SpectralGrid(64, 5.0)


class TestResidual:
    def test_zero_state_is_stationary(self):
        p = regime_parameters("linear", C=-1.0)
        r = residual(p, GRID, FieldPair(np.zeros(64), np.zeros(64)))
        assert np.max(np.abs(r)) == 0.0

    def test_matches_direct_evaluation_for_constants(self):
        from bvamx.model import reaction_terms

        p = regime_parameters("cross", C=-0.7)
        r = residual(p, GRID, FieldPair(np.full(64, 0.3), np.full(64, -0.4)))
        r1, r2 = reaction_terms(p, 0.3, -0.4)
        assert np.allclose(r[:64], r1, atol=1e-13)
        assert np.allclose(r[64:], r2, atol=1e-13)


class TestLaplacianMatrix:
    def test_annihilates_constants(self):
        lap = laplacian_matrix(GRID)
        assert np.max(np.abs(lap @ np.ones(64))) < 1e-10

    def test_cosine_eigenvector(self):
        lap = laplacian_matrix(GRID)
        for m in (1, 3, 7):
            u = np.cos(np.pi * m * GRID.x / 5)
            assert np.allclose(lap @ u, -((np.pi * m / 5) ** 2) * u, atol=1e-8)

    def test_symmetric(self):
        lap = laplacian_matrix(GRID)
        assert np.max(np.abs(lap - lap.T)) < 1e-9


class TestLinearization:
    def test_matches_finite_differences(self):
        p = regime_parameters("self_u1", C=-1.0)
        rng = np.random.default_rng(3)
        v0 = 0.3 * rng.normal(size=128)
        state = FieldPair(v0[:64], v0[64:])
        A = assemble_linearization(p, GRID, state)
        h = 1e-6
        rng2 = np.random.default_rng(4)
        for _ in range(10):
            d = rng2.normal(size=128)
            rp = residual(p, GRID, FieldPair(*np.split(v0 + h * d, 2)))
            rm = residual(p, GRID, FieldPair(*np.split(v0 - h * d, 2)))
            fd = (rp - rm) / (2 * h)
            assert np.max(np.abs(A @ d - fd)) < 1e-4 * max(1.0, np.max(np.abs(fd)))

    def test_zero_state_block_structure(self):
        # at u = 0 the reaction Jacobian is constant and the operator is
        # J_R (x) I + diag(d1, d2) (x) Lap
        p = regime_parameters("linear", C=-1.2)
        A = assemble_linearization(p, GRID, FieldPair(np.zeros(64), np.zeros(64)))
        lap = laplacian_matrix(GRID)
        jr = reaction_jacobian(p, 0.0, 0.0)
        eye = np.eye(64)
        expected = np.block([
            [jr[0][0] * eye + p.d1 * lap, jr[0][1] * eye],
            [jr[1][0] * eye, jr[1][1] * eye + p.d2 * lap],
        ])
        assert np.max(np.abs(A - expected)) < 1e-8


class TestPreconditioner:
    def test_inverts_zero_state_operator(self):
        p = regime_parameters("linear", C=-1.0)
        M = zero_state_preconditioner(p, GRID)
        A = assemble_linearization(p, GRID, FieldPair(np.zeros(64), np.zeros(64)))
        rng = np.random.default_rng(7)
        for _ in range(5):
            v = rng.normal(size=128)
            assert np.max(np.abs(M.matvec(A @ v) - v)) < 1e-8


class TestNewtonKrylov:
    @pytest.mark.parametrize("regime", ["linear", "self_u1", "self_u2", "cross"])
    def test_converges_from_cosine_guess(self, regime):
        p = regime_parameters(regime, C=-0.5)
        res = newton_krylov_solve(p, GRID, cosine_guess(GRID))
        assert res.converged
        assert res.residual_norm < 1e-10
        # nontrivial pattern, not the homogeneous zero state
        assert np.max(np.abs(res.state.u1)) > 0.1

    def test_solution_is_a_fixed_point_of_the_flow(self):
        p = regime_parameters("linear", C=-0.5)
        res = newton_krylov_solve(p, GRID, cosine_guess(GRID))
        moved = flow_map(p, GRID, res.state, 1.0, 5e-4)
        assert np.max(np.abs(moved.to_vector() - res.state.to_vector())) < 1e-7

    def test_nonconvergence_reported_not_raised(self):
        p = regime_parameters("linear", C=-0.5)
        res = newton_krylov_solve(p, GRID, cosine_guess(GRID), max_iter=1,
                                  tol=1e-14)
        assert not res.converged


class TestStabilitySpectrum:
    def test_diffusion_only_spectrum(self):
        # with eta = 0 the operator is diag(d1, d2) (x) Lap whose spectrum
        # is exactly {-d_i k_m^2}
        p = ModelParameters(eta=0.0, d1=0.08, d2=1.0)
        rep = stability_spectrum(p, GRID, FieldPair(np.zeros(64), np.zeros(64)))
        ks = np.pi * np.arange(-32, 32) / 5
        expected = np.sort(np.concatenate([-0.08 * ks**2, -1.0 * ks**2]))
        got = np.sort(rep.eigenvalues.real)
        assert np.allclose(got, expected, atol=1e-7)
        assert np.max(np.abs(rep.eigenvalues.imag)) < 1e-7
        assert rep.stable  # zero eigenvalue admitted by the threshold

    def test_turing_state_stable_before_oscillation_onset(self):
        p = regime_parameters("linear", C=-0.8)
        res = newton_krylov_solve(p, GRID, cosine_guess(GRID, amplitude=1.0))
        rep = stability_spectrum(p, GRID, res.state)
        assert rep.stable
        # translation mode sits at zero within the threshold
        assert rep.max_real_part > -rep.threshold

    def test_turing_state_unstable_past_onset(self):
        p = regime_parameters("linear", C=-1.2)
        res = newton_krylov_solve(p, GRID, cosine_guess(GRID, amplitude=1.0))
        rep = stability_spectrum(p, GRID, res.state)
        assert not rep.stable
        assert rep.hopf_candidate
        assert rep.leading_eigenvector.shape == (128,)

    def test_eigenvalues_sorted_by_real_part(self):
        p = regime_parameters("linear", C=-1.0)
        rep = stability_spectrum(p, GRID, FieldPair(np.zeros(64), np.zeros(64)))
        assert np.all(np.diff(rep.eigenvalues.real) <= 1e-12)
        assert rep.max_real_part == pytest.approx(rep.eigenvalues[0].real)

"""Kernels, noise samplers, and their statistical self-validation."""

import numpy as np
import pytest

from cascade_qsd.model import ParameterSet
from cascade_qsd.noise import (
    NoiseRealization,
    TimeGrid,
    alpha,
    beta,
    grid_for,
    sample_realization,
    sample_y,
    sample_z,
    trajectory_seed_sequences,
    validate_noise,
    y_cholesky,
    y_covariance,
)


def params(**overrides):
    base = dict(
        omega_s=2.0, g=1.0, kappa1=1.0, kappa2=1.0, Gamma=1.0, gamma=1.0,
        t_max=1.0, dt=0.125, n_traj=10, seed=99, initial_state="bell_psi_plus",
    )
    base.update(overrides)
    return ParameterSet(**base)


class TestKernels:
    def test_alpha_zero_lag(self):
        assert alpha(0.7, 0.7, params(g=1.0)) == pytest.approx(1.0)

    def test_alpha_half_period(self):
        val = alpha(np.pi, 0.0, params(g=1.0))
        assert val == pytest.approx(-1.0, abs=1e-12)

    def test_alpha_hermitian(self):
        rng = np.random.default_rng(2)
        p = params(g=1.3)
        for _ in range(10):
            t, s = rng.uniform(0, 5, size=2)
            assert alpha(t, s, p) == pytest.approx(np.conj(alpha(s, t, p)), abs=1e-12)

    def test_beta_zero_lag(self):
        assert beta(1.0, 1.0, params(Gamma=1.0, gamma=5.0)) == pytest.approx(2.5)

    def test_beta_direct_value(self):
        val = beta(3.0, 1.0, params(Gamma=1.0, gamma=0.5))
        assert val == pytest.approx(0.25 * np.exp(-1.0), abs=1e-12)

    def test_beta_zero_strength(self):
        p = params(Gamma=0.0)
        assert beta(0.3, 2.9, p) == 0.0

    def test_alpha_modulus_constant(self):
        p = params(g=0.7)
        ts = np.linspace(0, 9, 13)
        vals = alpha(ts[:, None], ts[None, :], p)
        assert np.allclose(np.abs(vals), 0.49)


class TestGrid:
    def test_times(self):
        g = TimeGrid(dt=0.25, n_steps=4)
        assert np.allclose(g.times, [0, 0.25, 0.5, 0.75, 1.0])
        assert g.t_max == 1.0

    def test_grid_for_requires_integer_steps(self):
        with pytest.raises(ValueError, match="integer multiple"):
            grid_for(params(t_max=1.0, dt=0.3))

    def test_trapezoid_weights(self):
        g = TimeGrid(dt=0.5, n_steps=4)
        assert np.allclose(g.trapezoid_weights(2), [0.25, 0.5, 0.25])
        assert np.allclose(g.trapezoid_weights(0), [0.0])


class TestSampleZ:
    def test_zero_coupling(self):
        p = params(g=0.0)
        grid = grid_for(p)
        z, z0 = sample_z(np.random.default_rng(0), grid, p)
        assert np.all(z == 0.0)

    def test_deterministic_streams(self):
        p = params()
        grid = grid_for(p)
        ss_z, _ = trajectory_seed_sequences(p.seed, 3)
        a, _ = sample_z(np.random.default_rng(ss_z), grid, p)
        ss_z2, _ = trajectory_seed_sequences(p.seed, 3)
        b, _ = sample_z(np.random.default_rng(ss_z2), grid, p)
        assert np.array_equal(a, b)

    def test_phase_structure(self):
        p = params(omega_s=1.0, g=2.0)
        grid = grid_for(p)
        z, z0 = sample_z(np.random.default_rng(5), grid, p)
        expected = -1j * p.g * np.conj(z0) * np.exp(1j * p.omega_c * grid.times)
        assert np.array_equal(z, expected)

    def test_second_moments_match_kernel(self):
        p = params(g=1.0, t_max=1.0, dt=0.125)
        grid = grid_for(p)
        n = 100_000
        rng = np.random.default_rng(1234)
        z0 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        paths = -1j * p.g * np.conj(z0)[:, None] * np.exp(1j * p.omega_c * grid.times)[None, :]
        z = np.conj(paths)
        pick = np.random.default_rng(4).integers(0, grid.n_steps + 1, size=(10, 2))
        for t_i, s_i in pick:
            emp = np.mean(z[:, t_i] * np.conj(z[:, s_i]))
            assert abs(emp - alpha(grid.times[t_i], grid.times[s_i], p)) <= 5.0 / np.sqrt(n)


class TestSampleY:
    def test_zero_strength_short_circuits(self):
        p = params(Gamma=0.0)
        grid = grid_for(p)
        y = sample_y(np.random.default_rng(0), grid, p)
        assert np.all(y == 0.0)

    def test_two_node_cholesky_closed_form(self):
        p = params(Gamma=1.0, gamma=1.0, t_max=0.5, dt=0.5)
        grid = grid_for(p)
        cov = y_covariance(grid, p)
        assert cov[0, 0] == pytest.approx(0.5)
        assert cov[0, 1] == pytest.approx(0.5 * np.exp(-0.5))
        chol = y_cholesky(grid, p)
        assert chol[0, 0] == pytest.approx(np.sqrt(0.5))
        assert np.allclose(chol @ chol.T, cov)

    def test_moments_match_kernel(self):
        p = params(Gamma=1.0, gamma=1.0, t_max=1.0, dt=0.125)
        grid = grid_for(p)
        n = 100_000
        rng = np.random.default_rng(77)
        chol = y_cholesky(grid, p)
        xi = (rng.standard_normal((n, 9)) + 1j * rng.standard_normal((n, 9))) / np.sqrt(2)
        y = xi @ chol.T  # unstarred process
        cov = y_covariance(grid, p)
        emp = (y.conj().T @ y) / n
        pseudo = (y.T @ y) / n
        assert np.max(np.abs(emp - cov)) <= 5.0 / np.sqrt(n)
        assert np.max(np.abs(pseudo)) <= 5.0 / np.sqrt(n)


class TestValidateNoise:
    def _paths(self, p, grid, n, scale=1.0):
        chol = y_cholesky(grid, p)
        out = []
        for k in range(n):
            r = sample_realization(p.seed, k, grid, p, chol)
            if scale != 1.0:
                r = NoiseRealization(
                    z_star=scale * r.z_star, y_star=scale * r.y_star, z0=r.z0
                )
            out.append(r)
        return out

    def test_conforming_paths_unflagged(self):
        p = params(t_max=1.0, dt=0.125)
        grid = grid_for(p)
        report = validate_noise(self._paths(p, grid, 10_000), p, grid)
        assert not report.flagged
        assert {c.name for c in report.checks} == {
            "mean_z", "mean_y", "cov_z_vs_alpha", "cov_y_vs_beta",
            "pseudo_cov_z", "pseudo_cov_y",
        }

    def test_scaled_paths_flagged(self):
        p = params(t_max=1.0, dt=0.125)
        grid = grid_for(p)
        report = validate_noise(self._paths(p, grid, 400, scale=2.0), p, grid)
        assert report.flagged

    def test_too_few_paths_rejected(self):
        p = params(t_max=1.0, dt=0.5)
        grid = grid_for(p)
        with pytest.raises(ValueError, match="at least 100"):
            validate_noise(self._paths(p, grid, 1), p, grid)

    def test_report_rows_shape(self):
        p = params(t_max=1.0, dt=0.25)
        grid = grid_for(p)
        rows = validate_noise(self._paths(p, grid, 150), p, grid).rows()
        assert rows[0][0] == "check"
        assert len(rows) == 7

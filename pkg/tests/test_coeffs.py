"""Coefficient-field hierarchy: closures, limits, symmetry, convergence."""

import warnings

import numpy as np
import pytest

from cascade_qsd.coeffs import (
    FieldBlowupError,
    assemble_obar,
    load_fields,
    save_fields,
    solve_coefficients,
)
from cascade_qsd.model import ParameterSet
from cascade_qsd.noise import NoiseRealization, grid_for


def params(**overrides):
    base = dict(
        omega_s=2.0, g=1.0, kappa1=1.0, kappa2=1.0, Gamma=1.0, gamma=5.0,
        t_max=1.0, dt=0.05, n_traj=1, seed=3, initial_state="bell_psi_plus",
        eom_variant="symmetrized",
    )
    base.update(overrides)
    return ParameterSet(**base)


def deterministic_noise(grid, p, z0=0.6 + 0.3j):
    """A fixed smooth noise pair, exact on any grid refinement."""
    t = grid.times
    z_star = -1j * p.g * np.conj(z0) * np.exp(1j * p.omega_c * t)
    y_star = 0.4 * np.exp(0.3j * t) - 0.1 * np.exp(-0.7j * t)
    return NoiseRealization(z_star=z_star, y_star=y_star, z0=z0)


class TestInitialAndDiagonal:
    def test_time_zero_values(self):
        p = params(kappa1=0.7, kappa2=1.3)
        f = solve_coefficients(p, store_slices=True)
        assert f.n_slices[0, 0, 0] == 0.7
        assert f.n_slices[1, 0, 0] == 1.3
        assert f.n_slices[2, 0, 0] == 0.0
        assert f.n_slices[3, 0, 0] == 0.0
        assert np.all(f.m_slices[:, 0, 0] == 0.0)
        assert np.all(f.N[:, 0] == 0.0)
        assert np.all(f.M[:, 0] == 0.0)

    def test_diagonal_relations_every_step(self):
        p = params()
        f = solve_coefficients(p, store_slices=True)
        kt = np.array([p.kappa1, p.kappa2, 0.0, 0.0])
        T = f.grid.n_steps
        for i in range(T + 1):
            assert np.array_equal(f.n_slices[:, i, i], kt - 1j * f.M[:, i])
            assert np.array_equal(f.m_slices[:, i, i], -1j * f.N[:, i])

    def test_zero_bath_kills_m_summaries(self):
        f = solve_coefficients(params(Gamma=0.0))
        assert np.all(f.M == 0.0)
        assert np.all(f.Q5 == 0.0)
        assert np.all(f.Q6 == 0.0)

    def test_deterministic_bitwise(self):
        a = solve_coefficients(params())
        b = solve_coefficients(params())
        for name in ("N", "M", "P5", "P6", "Q5", "Q6"):
            assert np.array_equal(getattr(a, name), getattr(b, name))


class TestFrequencyReflection:
    def test_reflection_conjugates_fields(self):
        # negating every frequency flips each explicit imaginary unit in the
        # hierarchy, so the solution maps to signed conjugates:
        # N -> conj(N), M -> -conj(M), P5 -> -conj(P5), Q5 -> conj(Q5),
        # P6 -> conj(P6), Q6 -> -conj(Q6); n_j -> conj(n_j).
        for variant in ("symmetrized", "as_printed"):
            p = params(t_max=0.5, dt=0.05, eom_variant=variant)
            q = params(
                t_max=0.5, dt=0.05, eom_variant=variant,
                omega_s=-p.omega_s, omega_a=-p.omega_a, omega_b=-p.omega_b,
                omega_c=-p.omega_c,
            )
            fp = solve_coefficients(p, store_slices=True)
            fq = solve_coefficients(q, store_slices=True)
            tol = 1e-12
            assert np.max(np.abs(fq.N - np.conj(fp.N))) <= tol
            assert np.max(np.abs(fq.M + np.conj(fp.M))) <= tol
            assert np.max(np.abs(fq.P5 + np.conj(fp.P5))) <= tol
            assert np.max(np.abs(fq.Q5 - np.conj(fp.Q5))) <= tol
            assert np.max(np.abs(fq.P6 - np.conj(fp.P6))) <= tol
            assert np.max(np.abs(fq.Q6 + np.conj(fp.Q6))) <= tol
            assert np.max(np.abs(fq.n_slices - np.conj(fp.n_slices))) <= tol
            assert np.max(np.abs(fq.m_slices + np.conj(fp.m_slices))) <= tol


class TestAssembleObar:
    def test_time_zero_is_zero_matrix(self):
        p = params()
        grid = grid_for(p)
        f = solve_coefficients(p)
        oz, oy = assemble_obar(f, deterministic_noise(grid, p), 0)
        assert np.all(oz == 0.0)
        assert np.all(oy == 0.0)

    def test_zero_bath_kills_oy(self):
        p = params(Gamma=0.0)
        grid = grid_for(p)
        f = solve_coefficients(p)
        noise = deterministic_noise(grid, p)
        for i in (3, grid.n_steps):
            _, oy = assemble_obar(f, noise, i)
            assert np.all(oy == 0.0)

    def test_out_of_range_rejected(self):
        p = params()
        grid = grid_for(p)
        f = solve_coefficients(p)
        with pytest.raises(IndexError, match="outside solved range"):
            assemble_obar(f, deterministic_noise(grid, p), grid.n_steps + 1)

    def test_second_order_self_convergence(self):
        # halve dt twice against the same analytic noise; the assembled
        # response matrix converges at second order
        p1 = params(t_max=1.0, dt=0.04)
        p2 = params(t_max=1.0, dt=0.02)
        p3 = params(t_max=1.0, dt=0.01)
        mats = []
        for p in (p1, p2, p3):
            grid = grid_for(p)
            f = solve_coefficients(p)
            oz, _ = assemble_obar(f, deterministic_noise(grid, p), grid.n_steps)
            mats.append(oz)
        e1 = np.max(np.abs(mats[0] - mats[2]))
        e2 = np.max(np.abs(mats[1] - mats[2]))
        # with errors c*dt^2: e1/e2 = (16-1)/(4-1) = 5
        assert e1 / e2 > 3.0


class TestGuards:
    def test_blowup_reports_location(self):
        # resonant leak-free coupling has a pole where the vacuum amplitude
        # crosses zero, near t = pi/(2 g sqrt(2)) for symmetric coupling
        p = params(omega_s=1.0, Gamma=0.0, g=1.0, t_max=2.0, dt=0.01)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(FieldBlowupError, match="not finite at t ="):
                solve_coefficients(p)

    def test_coarse_grid_warning(self):
        p = params(omega_s=1.0, Gamma=0.0, g=1.0, t_max=1.05, dt=0.05)
        with pytest.warns(RuntimeWarning, match="consider dt"):
            solve_coefficients(p)


class TestDumpLoad:
    def test_round_trip(self, tmp_path):
        p = params(t_max=0.5, dt=0.05)
        f = solve_coefficients(p, params_hash="cafe0123")
        path = tmp_path / "fields.bin"
        save_fields(f, path)
        g = load_fields(path)
        assert g.params_hash == "cafe0123"
        assert g.variant == f.variant
        assert g.grid == f.grid
        for name in ("N", "M", "P5", "P6", "Q5", "Q6"):
            assert np.array_equal(getattr(g, name), getattr(f, name))

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a dump\n")
        with pytest.raises(ValueError, match="not a coefficient-fields dump"):
            load_fields(path)

"""Concurrence, trace distance, and state scalars."""

import numpy as np
import pytest

from cascade_qsd.algebra import kron
from cascade_qsd.model import SIGMA_Y, ParameterSet, initial_state
from cascade_qsd.observables import (
    clamp_density,
    concurrence,
    smallest_eigenvalue,
    state_scalars,
    trace_distance,
)


def bell_psi_plus_rho():
    amp = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(amp, amp.conj())


def werner(p):
    return p * bell_psi_plus_rho() + (1 - p) * np.eye(4) / 4.0


def random_density(rng, rank=4):
    m = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def random_unitary_2(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestConcurrence:
    def test_bell_state_maximal(self):
        assert concurrence(bell_psi_plus_rho()) == pytest.approx(1.0, abs=1e-10)

    def test_separable_states_zero(self):
        ee = np.zeros((4, 4), dtype=complex)
        ee[0, 0] = 1.0
        assert concurrence(ee) == 0.0
        assert concurrence(np.eye(4) / 4.0) == 0.0

    def test_werner_half(self):
        # analytic concurrence of the Bell/maximally-mixed blend: (3p-1)/2
        assert concurrence(werner(0.5)) == pytest.approx(0.25, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 0.2, 1.0 / 3.0, 0.6, 0.9])
    def test_werner_family_analytic(self, p):
        expected = max(0.0, (3.0 * p - 1.0) / 2.0)
        assert concurrence(werner(p)) == pytest.approx(expected, abs=1e-10)

    def test_matches_direct_nonhermitian_spectrum(self):
        # same spectrum route as the textbook definition: eigenvalues of
        # rho * rho_tilde computed by a general eigensolver
        rng = np.random.default_rng(31)
        yy = kron(SIGMA_Y, SIGMA_Y)
        for _ in range(20):
            rho = random_density(rng)
            tilde = yy @ rho.conj() @ yy
            lam = np.linalg.eigvals(rho @ tilde)
            lam = np.sqrt(np.clip(np.sort(lam.real)[::-1], 0.0, None))
            expected = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
            assert concurrence(rho) == pytest.approx(expected, abs=1e-8)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            rho = random_density(rng)
            u = kron(random_unitary_2(rng), random_unitary_2(rng))
            rotated = u @ rho @ u.conj().T
            assert abs(concurrence(rotated) - concurrence(rho)) <= 1e-8

    def test_convexity_bound(self):
        rng = np.random.default_rng(53)
        for _ in range(10):
            r1, r2 = random_density(rng), random_density(rng)
            mix = 0.5 * r1 + 0.5 * r2
            assert concurrence(mix) <= 0.5 * concurrence(r1) + 0.5 * concurrence(r2) + 1e-8

    def test_clamps_noise_floor(self):
        rho = bell_psi_plus_rho()
        noisy = rho + np.diag([-0.01, 0.0033, 0.0033, 0.0034])
        c = concurrence(noisy)
        assert 0.9 < c <= 1.0

    def test_rejects_below_floor(self):
        rho = np.diag([1.1, -0.1, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="noise floor"):
            concurrence(rho)


class TestTraceDistance:
    def test_equal_states(self):
        rho = werner(0.3)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        ee = np.zeros((4, 4), dtype=complex)
        ee[0, 0] = 1.0
        gg = np.zeros((4, 4), dtype=complex)
        gg[3, 3] = 1.0
        assert trace_distance(ee, gg) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_difference(self):
        a = np.diag([0.6, 0.4, 0.0, 0.0]).astype(complex)
        b = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
        assert trace_distance(a, b) == pytest.approx(0.1, abs=1e-12)

    def test_metric_properties(self):
        rng = np.random.default_rng(61)
        for _ in range(10):
            a, b, c = (random_density(rng) for _ in range(3))
            assert trace_distance(a, b) == trace_distance(b, a)
            assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            trace_distance(np.eye(4) / 4, np.eye(2) / 2)


class TestStateScalars:
    def test_bell_state(self):
        out = state_scalars(bell_psi_plus_rho())
        assert np.allclose(out["populations"], [0.0, 0.5, 0.5, 0.0])
        assert out["coherence_l1"] == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed(self):
        out = state_scalars(np.eye(4) / 4.0)
        assert np.allclose(out["populations"], 0.25)
        assert out["coherence_l1"] == 0.0

    def test_fidelity_to_self(self):
        amp = initial_state(
            ParameterSet(
                omega_s=1.0, g=0.0, kappa1=1.0, kappa2=1.0, Gamma=0.0, gamma=1.0,
                t_max=1.0, dt=0.1, n_traj=1, seed=0, initial_state="bell_psi_plus",
            )
        )
        out = state_scalars(np.outer(amp, amp.conj()), target=amp)
        assert out["fidelity"] == pytest.approx(1.0, abs=1e-12)


class TestHelpers:
    def test_smallest_eigenvalue(self):
        assert smallest_eigenvalue(np.diag([0.5, 0.2, 0.3, 0.0])) == pytest.approx(0.0)

    def test_clamp_density_renormalizes(self):
        rho = np.diag([0.9, 0.15, -0.01, -0.04]).astype(complex)
        out = clamp_density(rho, floor=-0.05)
        w = np.linalg.eigvalsh(out)
        assert w[0] >= 0.0
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)

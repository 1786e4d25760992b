"""Scalar diagnostics of two-qubit states.

Concurrence is computed through a Hermitian route: the eigenvalues of
rho * rho_tilde equal those of sqrt(rho) * rho_tilde * sqrt(rho), which is
Hermitian PSD, so the whole computation stays inside the Hermitian
eigensolver.  Ensemble-estimated states may carry small negative eigenvalues
from Monte Carlo noise; anything above the documented floor is clamped to
zero and the state renormalized before evaluation.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from cascade_qsd.algebra import herm_eig, kron, require_hermitian, sqrt_psd
from cascade_qsd.model import SIGMA_Y

# Monte Carlo noise floor for ensemble density-matrix estimates.
ENSEMBLE_EIG_FLOOR = -0.02

_YY = kron(SIGMA_Y, SIGMA_Y)


def clamp_density(rho, floor: float = ENSEMBLE_EIG_FLOOR, rtol: float = 1e-10) -> np.ndarray:
    """Project a noisy Hermitian estimate onto the nearest valid state.

    Eigenvalues in [floor, 0) are clamped to zero and the state renormalized;
    an eigenvalue below the floor is a real error, not noise, and is rejected.
    """
    m = require_hermitian(rho, rtol)
    w, v = herm_eig(m, rtol)
    if float(w[0]) < floor:
        raise ValueError(
            f"density matrix has eigenvalue {w[0]:.4g} below the noise floor {floor:g}"
        )
    w = np.clip(w, 0.0, None)
    total = float(np.sum(w))
    if total <= 0.0:
        raise ValueError("density matrix has zero trace after clamping")
    out = (v * (w / total)) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def smallest_eigenvalue(rho) -> float:
    """Minimum eigenvalue of a Hermitian matrix (diagnostic)."""
    m = require_hermitian(rho, 1e-8)
    return float(np.linalg.eigvalsh(m)[0])


def concurrence(rho, floor: float = ENSEMBLE_EIG_FLOOR) -> float:
    """Two-qubit concurrence C = max(0, sqrt(l1)-sqrt(l2)-sqrt(l3)-sqrt(l4)).

    The l_k are the descending eigenvalues of rho * rho_tilde with
    rho_tilde = (sy x sy) conj(rho) (sy x sy), evaluated through the
    Hermitian form sqrt(rho) * rho_tilde * sqrt(rho).
    """
    m = clamp_density(rho, floor)
    if m.shape != (4, 4):
        raise ValueError("concurrence is defined for 4x4 two-qubit states")
    tilde = _YY @ m.conj() @ _YY
    root = sqrt_psd(m)
    herm = root @ tilde @ root
    herm = 0.5 * (herm + herm.conj().T)
    w, _ = herm_eig(herm, rtol=1e-8)
    lams = np.sqrt(np.clip(w[::-1], 0.0, None))
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def trace_distance(a, b) -> float:
    """Half the trace norm of (a - b) for Hermitian inputs.

    The pair is put into a canonical order first so the result is exactly
    symmetric (eigensolver rounding would otherwise differ in the last bit
    between a-b and b-a).
    """
    ma = require_hermitian(a, 1e-8)
    mb = require_hermitian(b, 1e-8)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    if mb.tobytes() < ma.tobytes():
        ma, mb = mb, ma
    mu = np.linalg.eigvalsh(ma - mb)
    return float(0.5 * np.sum(np.abs(mu)))


def state_scalars(rho, target: Optional[Sequence[complex]] = None) -> dict:
    """Populations, l1 coherence, and optionally fidelity to a pure target."""
    m = require_hermitian(rho, 1e-8)
    populations = np.real(np.diag(m)).copy()
    coherence_l1 = float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))
    out = {"populations": populations, "coherence_l1": coherence_l1}
    if target is not None:
        phi = np.asarray(list(target), dtype=np.complex128)
        out["fidelity"] = float(np.real(phi.conj() @ m @ phi))
    return out

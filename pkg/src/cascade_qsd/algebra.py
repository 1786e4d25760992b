"""Small dense complex linear-algebra kernel.

Everything in this project lives in Hilbert spaces of dimension <= ~40
(two qubits, truncated oscillator ladders, and their tensor products), so a
handful of dense helpers on plain complex ndarrays is all that is needed.
Eigen/Cholesky work is delegated to LAPACK via numpy; the functions here pin
down the contracts the rest of the package relies on (Hermiticity checks
with diagnostics, ascending eigenvalue order, PSD clamping).
"""

from __future__ import annotations

import numpy as np

HERM_RTOL = 1e-12
PSD_CLAMP = 1e-10
MAX_DIM = 64


class NotHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class NotPSDError(ValueError):
    """Input matrix has an eigenvalue below the PSD clamping threshold."""


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(a: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Largest |A[i,j] - conj(A[j,i])| and the offending index pair."""
    d = np.abs(a - a.conj().T)
    ij = np.unravel_index(int(np.argmax(d)), d.shape)
    return float(d[ij]), (int(ij[0]), int(ij[1]))


def require_hermitian(a, rtol: float = HERM_RTOL) -> np.ndarray:
    """Validate Hermiticity relative to the largest entry; return the matrix.

    Raises NotHermitianError naming the worst entry when the defect exceeds
    rtol * max|A|.
    """
    m = as_matrix(a)
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    defect, (i, j) = hermiticity_defect(m) if m.size else (0.0, (0, 0))
    if defect > rtol * max(scale, 1.0e-300):
        raise NotHermitianError(
            f"matrix is not Hermitian: |A[{i},{j}] - conj(A[{j},{i}])| = {defect:.3e} "
            f"exceeds {rtol:g} * max|A| = {rtol * scale:.3e}"
        )
    return m


def herm_eig(a, rtol: float = HERM_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector matrix with orthonormal
    columns) such that a @ v[:, k] = w[k] * v[:, k].
    """
    m = require_hermitian(a, rtol)
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds supported maximum {MAX_DIM}")
    w, v = np.linalg.eigh(m)
    return w, v


def sqrt_psd(a, clamp: float = PSD_CLAMP, rtol: float = HERM_RTOL) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in [-clamp, 0) are treated as roundoff and clamped to zero;
    anything below -clamp is rejected.
    """
    w, v = herm_eig(a, rtol)
    if w.size and float(w[0]) < -clamp:
        raise NotPSDError(f"matrix is not PSD: min eigenvalue {w[0]:.3e} < -{clamp:g}")
    root = np.sqrt(np.clip(w, 0.0, None))
    b = (v * root) @ v.conj().T
    return 0.5 * (b + b.conj().T)


def kron(a, b) -> np.ndarray:
    """Kronecker product with complex128 output."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def dag(a) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T

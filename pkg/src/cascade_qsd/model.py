"""Physical model: parameters, operator matrices, initial states.

Two qubits A and B sit in a single cavity mode; the cavity leaks into a
bosonic environment with an exponential (finite-memory) correlation kernel.
The qubit-side coupling operator is L = kappa1*sm_A + kappa2*sm_B.

Two-qubit basis order, fixed globally and recorded in every CSV header:

    index 0 = |ee>,  1 = |eg>,  2 = |ge>,  3 = |gg>

where the first letter is qubit A and |e> is the excited state.  Single-qubit
matrices use the same (|e>, |g>) order, so sigma_minus = [[0,0],[1,0]] lowers
|e> to |g> and sigma_z = diag(1,-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from cascade_qsd.algebra import dag, kron

BASIS_LABELS = ("ee", "eg", "ge", "gg")

INITIAL_STATES = ("bell_psi_plus", "bell_phi_plus", "ket_ee", "ket_gg", "custom")
EOM_VARIANTS = ("as_printed", "symmetrized")
METHODS = ("qsd", "oracle", "closed", "quadrature")

I2 = np.eye(2, dtype=np.complex128)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)


class ParameterError(ValueError):
    """A physical or numerical parameter is outside its domain."""


@dataclass(frozen=True)
class ParameterSet:
    """All physical and numerical knobs for one simulation.

    Frequencies are in units of the cavity frequency omega_c (default 1) and
    times in its inverse.  omega_a/omega_b default to omega_s; they are kept
    separate because the coefficient hierarchy distinguishes the two qubits
    even though the default system Hamiltonian does not.
    """

    omega_s: float
    g: float
    kappa1: float
    kappa2: float
    Gamma: float
    gamma: float
    t_max: float
    dt: float
    n_traj: int
    seed: int
    initial_state: str = "bell_psi_plus"
    omega_a: Optional[float] = None
    omega_b: Optional[float] = None
    omega_c: float = 1.0
    eom_variant: str = "as_printed"
    fock_cutoff_cavity: int = 2
    fock_cutoff_pseudomode: int = 2
    quadrature_nodes: int = 20
    initial_amplitudes: Optional[tuple[complex, complex, complex, complex]] = field(
        default=None
    )

    def __post_init__(self):
        if self.omega_a is None:
            object.__setattr__(self, "omega_a", float(self.omega_s))
        if self.omega_b is None:
            object.__setattr__(self, "omega_b", float(self.omega_s))
        _require(self.dt > 0.0, "dt", "must be > 0")
        _require(self.t_max >= self.dt, "t_max", "must be >= dt")
        _require(self.n_traj >= 1, "n_traj", "must be >= 1")
        _require(self.g >= 0.0, "g", "must be >= 0")
        _require(self.Gamma >= 0.0, "Gamma", "must be >= 0")
        _require(self.gamma >= 0.0, "gamma", "must be >= 0")
        if self.Gamma > 0.0:
            _require(self.gamma > 0.0, "gamma", "must be > 0 whenever Gamma > 0")
        _require(0 <= self.seed < 2**64, "seed", "must fit in 64 bits")
        _require(
            self.initial_state in INITIAL_STATES,
            "initial_state",
            f"must be one of {INITIAL_STATES}",
        )
        _require(
            self.eom_variant in EOM_VARIANTS,
            "eom_variant",
            f"must be one of {EOM_VARIANTS}",
        )
        _require(self.fock_cutoff_cavity >= 1, "fock_cutoff_cavity", "must be >= 1")
        _require(
            self.fock_cutoff_pseudomode >= 1, "fock_cutoff_pseudomode", "must be >= 1"
        )
        _require(self.quadrature_nodes >= 2, "quadrature_nodes", "must be >= 2")
        if self.initial_state == "custom":
            if self.initial_amplitudes is None:
                raise ParameterError(
                    "initial_state = custom requires initial_amplitudes"
                )
            amp = np.asarray(self.initial_amplitudes, dtype=np.complex128)
            if amp.shape != (4,):
                raise ParameterError("initial_amplitudes must have exactly 4 entries")
            norm = float(np.linalg.norm(amp))
            if abs(norm - 1.0) > 1e-12:
                raise ParameterError(
                    f"initial_amplitudes must have unit norm (got {norm!r})"
                )


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ParameterError(f"{key} {message}")


@dataclass(frozen=True)
class OperatorSet:
    """The five lowering-sector operators plus L, its dagger, and H_s.

    ops[0..4] = (sm_A, sm_B, sz_A*sm_B, sm_A*sz_B, sm_A*sm_B) as 4x4 matrices
    in the global basis order.
    """

    ops: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    L: np.ndarray
    L_dag: np.ndarray
    H_s: np.ndarray


def build_operators(p: ParameterSet) -> OperatorSet:
    """Construct the operator matrices for the given parameters.

    Deterministic: identical parameters give bit-identical matrices.
    """
    o1 = kron(SIGMA_MINUS, I2)
    o2 = kron(I2, SIGMA_MINUS)
    o3 = kron(SIGMA_Z, SIGMA_MINUS)
    o4 = kron(SIGMA_MINUS, SIGMA_Z)
    o5 = o1 @ o2
    L = p.kappa1 * o1 + p.kappa2 * o2
    H_s = 0.5 * p.omega_a * kron(SIGMA_Z, I2) + 0.5 * p.omega_b * kron(I2, SIGMA_Z)
    return OperatorSet(ops=(o1, o2, o3, o4, o5), L=L, L_dag=dag(L), H_s=H_s)


def initial_state(p: ParameterSet) -> np.ndarray:
    """Initial two-qubit state vector in the global basis order."""
    if p.initial_state == "bell_psi_plus":
        amp = np.array([0.0, 1.0, 1.0, 0.0], dtype=np.complex128) / np.sqrt(2.0)
    elif p.initial_state == "bell_phi_plus":
        amp = np.array([1.0, 0.0, 0.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)
    elif p.initial_state == "ket_ee":
        amp = np.array([1.0, 0.0, 0.0, 0.0], dtype=np.complex128)
    elif p.initial_state == "ket_gg":
        amp = np.array([0.0, 0.0, 0.0, 1.0], dtype=np.complex128)
    else:
        amp = np.asarray(p.initial_amplitudes, dtype=np.complex128).copy()
    return amp



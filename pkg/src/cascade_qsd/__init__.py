"""cascade-qsd: two-qubit dynamics in a leaky cavity with a structured environment.

The package simulates a pair of qubits coupled through a single lossy cavity
mode whose leakage field is itself a colored (finite-memory) Gaussian
environment.  Trajectories of the qubits are integrated as linear stochastic
pure states driven by two correlated complex noises; averaging the ensemble
recovers the reduced density matrix.  An exact pseudomode master-equation
reference is included for validation, along with entanglement diagnostics
and a CSV-emitting command line front end.
"""

from cascade_qsd.algebra import herm_eig, kron, sqrt_psd
from cascade_qsd.coeffs import CoefficientFields, assemble_obar, solve_coefficients
from cascade_qsd.config import ParameterSet, RunConfig, dump_config, parse_config
from cascade_qsd.model import OperatorSet, build_operators, initial_state
from cascade_qsd.noise import (
    NoiseRealization,
    TimeGrid,
    alpha,
    beta,
    sample_y,
    sample_z,
    validate_noise,
)
from cascade_qsd.observables import concurrence, state_scalars, trace_distance
from cascade_qsd.oracle import closed_system, pseudomode_lindblad
from cascade_qsd.resultio import SimulationResult, read_result_csv, write_result_csv
from cascade_qsd.trajectory import propagate, quadrature_ensemble, run_ensemble

__version__ = "0.1.0"

__all__ = [
    "CoefficientFields",
    "NoiseRealization",
    "OperatorSet",
    "ParameterSet",
    "RunConfig",
    "SimulationResult",
    "TimeGrid",
    "alpha",
    "assemble_obar",
    "beta",
    "build_operators",
    "closed_system",
    "concurrence",
    "dump_config",
    "herm_eig",
    "initial_state",
    "kron",
    "parse_config",
    "propagate",
    "pseudomode_lindblad",
    "quadrature_ensemble",
    "read_result_csv",
    "run_ensemble",
    "sample_y",
    "sample_z",
    "solve_coefficients",
    "sqrt_psd",
    "state_scalars",
    "trace_distance",
    "validate_noise",
    "write_result_csv",
]

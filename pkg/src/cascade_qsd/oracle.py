"""Independent exact references for the reduced two-qubit dynamics.

Two solvers that never touch the trajectory machinery:

* `pseudomode_lindblad` - the exponential leakage kernel is exactly the
  vacuum correlation of one damped auxiliary mode, so qubits + cavity +
  that mode evolve under a Lindblad equation whose partial trace is the
  exact reduced state.  With kernel (Gamma*gamma/2) exp(-gamma*|t-s|) seen
  through the cavity coupling, the auxiliary mode sits at frequency zero
  with coupling lam = g*sqrt(Gamma*gamma/2) and decay rate 2*gamma.
* `closed_system` - for Gamma == 0 the cavity does not leak and the
  qubits x cavity state is evolved exactly by eigendecomposition.

The oracle steps four times per output node so it is always the more
accurate side of any comparison.
"""

from __future__ import annotations

import numpy as np

from cascade_qsd.algebra import dag, herm_eig, kron
from cascade_qsd.config import params_hash as _params_hash
from cascade_qsd.model import ParameterError, ParameterSet, build_operators, initial_state
from cascade_qsd.noise import TimeGrid, grid_for
from cascade_qsd.observables import concurrence, smallest_eigenvalue
from cascade_qsd.resultio import SimulationResult

TRACE_TOL = 1e-9
LEAK_TOL = 1e-8
EXCITATION_TOL = 1e-8
MIN_EIG_TOL = -1e-8


class CutoffError(RuntimeError):
    """Population leaked above the top retained Fock level."""


def destroy(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(np.complex128)


def _kron3(a, b, c) -> np.ndarray:
    return kron(kron(a, b), c)


def _initial_excitations(psi: np.ndarray) -> int:
    per_basis = (2, 1, 1, 0)
    occupied = [per_basis[k] for k in range(4) if abs(psi[k]) > 1e-14]
    return max(occupied) if occupied else 0


def _cutoffs(p: ParameterSet, psi: np.ndarray) -> tuple[int, int]:
    exc = _initial_excitations(psi)
    return max(p.fock_cutoff_cavity, exc), max(p.fock_cutoff_pseudomode, exc)


def pseudomode_lindblad(p: ParameterSet, grid: TimeGrid | None = None) -> SimulationResult:
    """Exact reduced dynamics via one damped auxiliary mode.

    Integrates d rho/dt = -i[H, rho] + G_pm (c rho c^+ - {c^+ c, rho}/2)
    on qubits x cavity x auxiliary mode with RK4 at dt/4, then traces out
    both oscillators.  Trace preservation, Fock-cutoff leakage, excitation
    monotonicity, and positivity are asserted along the way.
    """
    grid = grid or grid_for(p)
    psi0 = initial_state(p)
    nc, npm = _cutoffs(p, psi0)
    dim_c, dim_p = nc + 1, npm + 1
    # the coupling ladder never raises the total excitation number, so levels
    # above the initial count are unreachable; the leakage sentinel is only
    # meaningful for a top level that should stay empty
    exc0 = _initial_excitations(psi0)
    ops = build_operators(p)
    i4 = np.eye(4, dtype=np.complex128)
    ic = np.eye(dim_c, dtype=np.complex128)
    ip = np.eye(dim_p, dtype=np.complex128)
    a = destroy(dim_c)
    c = destroy(dim_p)

    lam = p.g * np.sqrt(0.5 * p.Gamma * p.gamma)
    gamma_pm = 2.0 * p.gamma
    H = (
        _kron3(ops.H_s, ic, ip)
        + p.omega_c * _kron3(i4, dag(a) @ a, ip)
        + p.g * (_kron3(ops.L, dag(a), ip) + _kron3(ops.L_dag, a, ip))
        + lam * (_kron3(i4, a, dag(c)) + _kron3(i4, dag(a), c))
    )
    C = _kron3(i4, ic, c)
    Cd = dag(C)
    CdC = Cd @ C
    A = -1j * H - 0.5 * gamma_pm * CdC

    n_exc = _kron3(_exc_qubits(), ic, ip) + _kron3(i4, dag(a) @ a, ip) + CdC

    psi_full = _kron3(psi0.reshape(4, 1), _vac(dim_c), _vac(dim_p)).ravel()
    rho = np.outer(psi_full, psi_full.conj())

    def rhs(r):
        ar = A @ r
        out = ar + ar.conj().T
        if gamma_pm != 0.0:
            out += gamma_pm * (C @ r @ Cd)
        return out

    nt = grid.n_steps + 1
    h = grid.dt / 4.0
    reduced = np.empty((nt, 4, 4), dtype=np.complex128)
    traces = np.empty(nt)
    prev_exc = None
    eig_check_stride = max(1, grid.n_steps // 8)

    for k in range(nt):
        tr = float(np.real(np.trace(rho)))
        traces[k] = tr
        if abs(tr - 1.0) > TRACE_TOL:
            raise RuntimeError(f"reference lost trace preservation at t = {grid.times[k]:.6g}: {tr!r}")
        leak = _top_level_population(rho, dim_c, dim_p, exc0)
        if leak > LEAK_TOL:
            raise CutoffError(
                f"population {leak:.3e} above the retained Fock levels at "
                f"t = {grid.times[k]:.6g}; raise the cutoffs"
            )
        exc = float(np.real(np.trace(n_exc @ rho)))
        if prev_exc is not None and exc > prev_exc + EXCITATION_TOL:
            raise RuntimeError(
                f"excitation number increased at t = {grid.times[k]:.6g}: {prev_exc!r} -> {exc!r}"
            )
        prev_exc = exc
        if k % eig_check_stride == 0 or k == nt - 1:
            w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
            if float(w[0]) < MIN_EIG_TOL:
                raise RuntimeError(
                    f"reference state lost positivity at t = {grid.times[k]:.6g}: {w[0]:.3e}"
                )
        reduced[k] = _ptrace_to_qubits(rho, dim_c, dim_p)
        if k < nt - 1:
            for _ in range(4):
                k1 = rhs(rho)
                k2 = rhs(rho + 0.5 * h * k1)
                k3 = rhs(rho + 0.5 * h * k2)
                k4 = rhs(rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return _package(p, grid, reduced, traces, "oracle")


def closed_system(p: ParameterSet, grid: TimeGrid | None = None) -> SimulationResult:
    """Exact qubits x cavity evolution for the leak-free model (Gamma == 0)."""
    if p.Gamma != 0.0:
        raise ParameterError("closed_system requires Gamma == 0")
    grid = grid or grid_for(p)
    psi0 = initial_state(p)
    nc, _ = _cutoffs(p, psi0)
    dim_c = nc + 1
    ops = build_operators(p)
    i4 = np.eye(4, dtype=np.complex128)
    ic = np.eye(dim_c, dtype=np.complex128)
    a = destroy(dim_c)
    H = (
        kron(ops.H_s, ic)
        + p.omega_c * kron(i4, dag(a) @ a)
        + p.g * (kron(ops.L, dag(a)) + kron(ops.L_dag, a))
    )
    energies, modes = herm_eig(H)
    psi_full = kron(psi0.reshape(4, 1), _vac(dim_c)).ravel()
    coeff = modes.conj().T @ psi_full

    nt = grid.n_steps + 1
    phases = np.exp(-1j * np.outer(grid.times, energies))
    states = (phases * coeff[None, :]) @ modes.T  # (nt, dim)

    e0 = float(np.real(coeff.conj() @ (energies * coeff)))
    drift = np.max(
        np.abs(np.real(np.einsum("td,de,te->t", states.conj(), H, states)) - e0)
    )
    if drift > 1e-10 * max(1.0, abs(e0)):
        raise RuntimeError(f"energy drifted by {drift:.3e} in the closed reference")

    blocks = states.reshape(nt, 4, dim_c)
    reduced = np.einsum("tai,tbi->tab", blocks, blocks.conj())
    traces = np.real(np.trace(reduced, axis1=1, axis2=2)).copy()
    return _package(p, grid, reduced, traces, "closed")


def _exc_qubits() -> np.ndarray:
    return np.diag(np.array([2.0, 1.0, 1.0, 0.0])).astype(np.complex128)


def _vac(dim: int) -> np.ndarray:
    v = np.zeros((dim, 1), dtype=np.complex128)
    v[0, 0] = 1.0
    return v


def _top_level_population(rho: np.ndarray, dim_c: int, dim_p: int, exc: int) -> float:
    r = rho.reshape(4, dim_c, dim_p, 4, dim_c, dim_p)
    pops = []
    if dim_c - 1 > exc:
        pops.append(float(np.real(np.einsum("apap->", r[:, dim_c - 1, :, :, dim_c - 1, :]))))
    if dim_p - 1 > exc:
        pops.append(float(np.real(np.einsum("acac->", r[:, :, dim_p - 1, :, :, dim_p - 1]))))
    return max(pops) if pops else 0.0


def _ptrace_to_qubits(rho: np.ndarray, dim_c: int, dim_p: int) -> np.ndarray:
    r = rho.reshape(4, dim_c, dim_p, 4, dim_c, dim_p)
    return np.einsum("aijbij->ab", r)


def _package(p: ParameterSet, grid: TimeGrid, reduced, traces, method: str) -> SimulationResult:
    from cascade_qsd import __version__

    nt = reduced.shape[0]
    rho = reduced / traces[:, None, None]
    rho = 0.5 * (rho + np.conj(np.transpose(rho, (0, 2, 1))))
    conc = np.array([concurrence(rho[k]) for k in range(nt)])
    mineig = np.array([smallest_eigenvalue(rho[k]) for k in range(nt)])
    return SimulationResult(
        times=grid.times,
        rho=rho,
        rho_raw_trace=traces,
        concurrence=conc,
        concurrence_stderr=np.zeros(nt),
        min_eig=mineig,
        provenance={
            "version": __version__,
            "method": method,
            "eom_variant": p.eom_variant,
            "seed": p.seed,
            "params_hash": _params_hash(p),
            "n_traj": 0,
            "flagged_trajectories": 0,
        },
    )

"""Linear stochastic trajectories and their deterministic-seeded ensembles.

Each trajectory integrates the unnormalized pure-state equation

    d psi/dt = [ -i H_s + z*_t L - (L^dag + i y*_t) Obar_z(t)
                 - i z*_t Obar_y(t) ] psi

with RK4 on the grid; values of the noises and of the assembled response
matrices at half steps are linear interpolations of the node values.  The
plain average of |psi><psi| over the two Gaussian noises recovers the
reduced density matrix; no norm correction or reweighting is applied, so
individual norms wander (that is a property of the linear equation, not a
bug) and only diverging trajectories (norm > 1e6) are flagged - flagged
trajectories stay in the average and the count is reported loudly, because
silently excluding them would bias the estimate.

Ensembles are deterministic: trajectory k derives its two noise streams
purely from (master seed, k), the ensemble is processed in fixed-size
chunks in index order, and the reduction never depends on scheduling, so
repeated runs are bit-identical.
"""

from __future__ import annotations

import numpy as np

from cascade_qsd.coeffs import CoefficientFields, solve_coefficients
from cascade_qsd.config import params_hash as _params_hash
from cascade_qsd.model import (
    ParameterError,
    ParameterSet,
    build_operators,
    initial_state,
)
from cascade_qsd.noise import (
    NoiseRealization,
    TimeGrid,
    grid_for,
    sample_y,
    sample_z,
    trajectory_seed_sequences,
    y_cholesky,
    z_path_from_amplitude,
)
from cascade_qsd.observables import concurrence, smallest_eigenvalue
from cascade_qsd.resultio import SimulationResult

NORM_FLAG = 1.0e6
N_BATCHES = 10
CHUNK = 2048


def _node_matrices(p: ParameterSet, fields: CoefficientFields):
    """Per-node deterministic 4x4 blocks of the trajectory generator.

    Writing F_z(t) = sum_j N_j(t) ops[j] and F_y likewise with M_j, the
    generator splits as

        G(t) = M0(t) + z*_t Mz(t) + y*_t My(t)
               + c_z(t) K1 + (y*_t c_z(t) + z*_t c_y(t)) K2

    with M0 = -i H_s - L^dag F_z, Mz = L - i F_y, My = -i F_z,
    K1 = -L^dag ops[4], K2 = -i ops[4], and c_z/c_y the scalar panel
    integrals against the noise paths.
    """
    ops = build_operators(p)
    ostack = np.stack(ops.ops[:4])
    Fz = np.einsum("jt,jab->tab", fields.N, ostack)
    Fy = np.einsum("jt,jab->tab", fields.M, ostack)
    M0 = (-1j * ops.H_s)[None, :, :] - ops.L_dag @ Fz
    Mz = ops.L[None, :, :] - 1j * Fy
    My = -1j * Fz
    K1 = -ops.L_dag @ ops.ops[4]
    K2 = -1j * ops.ops[4]
    return M0, Mz, My, K1, K2


def _weighted_panels(fields: CoefficientFields) -> tuple[np.ndarray, ...]:
    """Panel summaries premultiplied by their trapezoid quadrature weights."""
    grid = fields.grid
    T = grid.n_steps
    tz = np.full((T + 1, T + 1), grid.dt)
    tz[:, 0] = 0.5 * grid.dt
    idx = np.arange(T + 1)
    tz[idx, idx] = 0.5 * grid.dt
    tz[0, 0] = 0.0
    tz *= idx[None, :] <= idx[:, None]
    return (fields.P5 * tz, fields.P6 * tz, fields.Q5 * tz, fields.Q6 * tz)


def _panel_scalars(fields: CoefficientFields, zs: np.ndarray, ys: np.ndarray):
    """c_z and c_y for a batch of noise paths, all nodes at once."""
    w5, w6, v5, v6 = _weighted_panels(fields)
    cz = 1j * (zs @ w5.T + ys @ w6.T)
    cy = 1j * (zs @ v5.T + ys @ v6.T)
    return cz, cy


def _propagate_batch(
    psi0: np.ndarray,
    zs: np.ndarray,
    ys: np.ndarray,
    fields: CoefficientFields,
    p: ParameterSet,
) -> tuple[np.ndarray, np.ndarray]:
    """RK4-propagate a batch of trajectories; returns (states, flagged)."""
    grid = fields.grid
    T = grid.n_steps
    dt = grid.dt
    nb = zs.shape[0]
    M0, Mz, My, K1, K2 = _node_matrices(p, fields)
    cz, cy = _panel_scalars(fields, zs, ys)

    K1t = np.ascontiguousarray(K1.T)
    K2t = np.ascontiguousarray(K2.T)

    def apply_g(psi, m0t, mzt, myt, z, y, c_z, c_y):
        out = psi @ m0t
        out += (psi @ mzt) * z[:, None]
        out += (psi @ myt) * y[:, None]
        out += (psi @ K1t) * c_z[:, None]
        out += (psi @ K2t) * (y * c_z + z * c_y)[:, None]
        return out

    psis = np.empty((nb, T + 1, 4), dtype=np.complex128)
    psi = np.broadcast_to(psi0, (nb, 4)).astype(np.complex128).copy()
    psis[:, 0, :] = psi
    flagged = np.zeros(nb, dtype=bool)

    for i in range(T):
        a = (M0[i].T, Mz[i].T, My[i].T, zs[:, i], ys[:, i], cz[:, i], cy[:, i])
        bmats = (M0[i + 1].T, Mz[i + 1].T, My[i + 1].T)
        b = (*bmats, zs[:, i + 1], ys[:, i + 1], cz[:, i + 1], cy[:, i + 1])
        mid = tuple(0.5 * (x + y_) for x, y_ in zip(a, b))

        k1 = apply_g(psi, *a)
        k2 = apply_g(psi + (0.5 * dt) * k1, *mid)
        k3 = apply_g(psi + (0.5 * dt) * k2, *mid)
        k4 = apply_g(psi + dt * k3, *b)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if not np.all(np.isfinite(psi)):
            raise RuntimeError(
                f"trajectory state became non-finite at t = {grid.times[i + 1]:.6g}"
            )
        norms = np.linalg.norm(psi, axis=1)
        flagged |= norms > NORM_FLAG
        psis[:, i + 1, :] = psi

    return psis, flagged


def propagate(
    psi0: np.ndarray,
    fields: CoefficientFields,
    noise: NoiseRealization,
    p: ParameterSet,
    grid: TimeGrid | None = None,
) -> np.ndarray:
    """Integrate one trajectory; returns the state at every grid node."""
    g = grid or fields.grid
    if g != fields.grid:
        raise ValueError("grid does not match the solved fields")
    zs = np.asarray(noise.z_star, dtype=np.complex128)[None, :]
    ys = np.asarray(noise.y_star, dtype=np.complex128)[None, :]
    if zs.shape[1] != g.n_steps + 1 or ys.shape[1] != g.n_steps + 1:
        raise ValueError("noise paths do not match the grid")
    psis, _ = _propagate_batch(np.asarray(psi0, dtype=np.complex128), zs, ys, fields, p)
    return psis[0]


def _summarize(
    p: ParameterSet,
    grid: TimeGrid,
    rho_raw: np.ndarray,
    batch_rho: np.ndarray | None,
    batch_counts: np.ndarray | None,
    method: str,
    extra_prov: dict,
) -> SimulationResult:
    """Normalize, derive scalars, and package a result."""
    from cascade_qsd import __version__

    nt = grid.n_steps + 1
    trace_raw = np.real(np.trace(rho_raw, axis1=1, axis2=2))
    if np.any(trace_raw <= 0.0):
        raise RuntimeError("ensemble produced a nonpositive raw trace")
    rho = rho_raw / trace_raw[:, None, None]
    rho = 0.5 * (rho + np.conj(np.transpose(rho, (0, 2, 1))))

    conc = np.array([concurrence(rho[k]) for k in range(nt)])
    mineig = np.array([smallest_eigenvalue(rho[k]) for k in range(nt)])

    stderr = np.zeros(nt)
    trace_stderr = None
    if batch_rho is not None and batch_counts is not None:
        live = np.flatnonzero(batch_counts > 0)
        if live.size >= 2:
            per_batch = np.empty((live.size, nt))
            batch_traces = np.empty((live.size, nt))
            for bi, b in enumerate(live):
                rb = batch_rho[b] / batch_counts[b]
                tr = np.real(np.trace(rb, axis1=1, axis2=2))
                batch_traces[bi] = tr
                rb = rb / tr[:, None, None]
                # batches are noisier than the full mean; clamp generously
                per_batch[bi] = [concurrence(rb[k], floor=-0.5) for k in range(nt)]
            stderr = np.std(per_batch, axis=0, ddof=1) / np.sqrt(live.size)
            trace_stderr = np.std(batch_traces, axis=0, ddof=1) / np.sqrt(live.size)

    prov = {
        "version": __version__,
        "method": method,
        "eom_variant": p.eom_variant,
        "seed": p.seed,
        "params_hash": _params_hash(p),
    }
    prov.update(extra_prov)
    return SimulationResult(
        times=grid.times,
        rho=rho,
        rho_raw_trace=trace_raw,
        concurrence=conc,
        concurrence_stderr=stderr,
        min_eig=mineig,
        provenance=prov,
        trace_stderr=trace_stderr,
    )


def run_ensemble(
    p: ParameterSet,
    grid: TimeGrid | None = None,
    fields: CoefficientFields | None = None,
) -> SimulationResult:
    """Monte Carlo ensemble over both noises with deterministic seeding.

    Coefficient fields are solved once and shared read-only; trajectory k
    draws its z and y streams from (seed, k) regardless of ensemble size,
    so growing n_traj reuses earlier trajectories unchanged.  Accumulation
    runs in trajectory-index order into ten fixed batches (k mod 10) used
    for the concurrence error bars.
    """
    grid = grid or grid_for(p)
    if fields is None:
        fields = solve_coefficients(p, grid, params_hash=_params_hash(p))
    elif fields.grid != grid:
        raise ValueError("pre-solved fields do not match the run grid")
    psi0 = initial_state(p)
    chol = y_cholesky(grid, p)
    nt = grid.n_steps + 1

    acc = np.zeros((N_BATCHES, nt, 4, 4), dtype=np.complex128)
    counts = np.zeros(N_BATCHES, dtype=np.int64)
    flagged_total = 0

    for start in range(0, p.n_traj, CHUNK):
        ks = np.arange(start, min(start + CHUNK, p.n_traj))
        nb = ks.size
        zs = np.empty((nb, nt), dtype=np.complex128)
        ys = np.empty((nb, nt), dtype=np.complex128)
        for local, k in enumerate(ks):
            ss_z, ss_y = trajectory_seed_sequences(p.seed, int(k))
            zs[local], _ = sample_z(np.random.default_rng(ss_z), grid, p)
            ys[local] = sample_y(np.random.default_rng(ss_y), grid, p, chol)
        psis, flagged = _propagate_batch(psi0, zs, ys, fields, p)
        flagged_total += int(flagged.sum())
        for b in range(N_BATCHES):
            sel = (ks % N_BATCHES) == b
            if np.any(sel):
                acc[b] += np.einsum("nto,ntp->top", psis[sel], np.conj(psis[sel]))
                counts[b] += int(sel.sum())

    if flagged_total >= p.n_traj:
        raise RuntimeError(
            f"all {p.n_traj} trajectories exceeded the norm threshold {NORM_FLAG:g}"
        )

    rho_raw = acc.sum(axis=0) / p.n_traj
    return _summarize(
        p,
        grid,
        rho_raw,
        acc,
        counts,
        "qsd",
        {"n_traj": p.n_traj, "flagged_trajectories": flagged_total},
    )


def quadrature_ensemble(
    p: ParameterSet,
    grid: TimeGrid | None = None,
    fields: CoefficientFields | None = None,
) -> SimulationResult:
    """Deterministic Gauss-Hermite average over the single cavity amplitude.

    Valid only when Gamma == 0, where the leakage noise vanishes and the
    only randomness left is the one complex Gaussian behind the cavity
    noise; the Monte Carlo average is then replaced by a tensor quadrature
    over its real and imaginary parts.
    """
    if p.Gamma != 0.0:
        raise ParameterError("quadrature_ensemble requires Gamma == 0")
    grid = grid or grid_for(p)
    if fields is None:
        fields = solve_coefficients(p, grid, params_hash=_params_hash(p))
    elif fields.grid != grid:
        raise ValueError("pre-solved fields do not match the run grid")
    psi0 = initial_state(p)
    nt = grid.n_steps + 1

    nodes, wts = np.polynomial.hermite.hermgauss(p.quadrature_nodes)
    u, v = np.meshgrid(nodes, nodes, indexing="ij")
    z0 = (u + 1j * v).ravel()
    weight = np.outer(wts, wts).ravel() / np.pi

    rho_raw = np.zeros((nt, 4, 4), dtype=np.complex128)
    for start in range(0, z0.size, CHUNK):
        blk = slice(start, min(start + CHUNK, z0.size))
        zs = np.stack([z_path_from_amplitude(z, grid, p) for z in z0[blk]])
        ys = np.zeros_like(zs)
        psis, _ = _propagate_batch(psi0, zs, ys, fields, p)
        rho_raw += np.einsum("n,nto,ntp->top", weight[blk], psis, np.conj(psis))

    return _summarize(
        p,
        grid,
        rho_raw,
        None,
        None,
        "quadrature",
        {"n_traj": int(z0.size), "flagged_trajectories": 0},
    )

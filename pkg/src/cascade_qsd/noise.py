"""Correlation kernels and discretized Gaussian noise paths.

Two independent complex Gaussian processes drive each trajectory:

* the cavity noise, a single complex Gaussian amplitude z0 carried around
  the unit circle at the cavity frequency, with kernel
  alpha(t, s) = g^2 * exp(-i * omega_c * (t - s));
* the leakage noise with the exponential finite-memory kernel
  beta(t, s) = (Gamma * gamma / 2) * exp(-gamma * |t - s|),
  synthesized exactly on the grid by a dense Cholesky factor of the kernel
  covariance matrix.

Conventions: a stored path holds the starred process that enters the
evolution equation; its complex conjugate is the process whose second moment
equals the kernel.  The complex Gaussian normalization is E[|z0|^2] = 1
(real and imaginary parts independent with variance 1/2), which makes the
plain ensemble average of projectors reproduce the density matrix without
reweighting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from cascade_qsd.model import ParameterSet

STREAM_Z = 0
STREAM_Y = 1


class CholeskyError(ValueError):
    """Kernel covariance failed its Cholesky factorization."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k * dt for k = 0..n_steps."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def t_max(self) -> float:
        return self.n_steps * self.dt

    def trapezoid_weights(self, upto: int) -> np.ndarray:
        """Composite trapezoid weights for nodes 0..upto (zero measure at upto=0)."""
        if upto == 0:
            return np.zeros(1)
        w = np.full(upto + 1, self.dt)
        w[0] = 0.5 * self.dt
        w[upto] = 0.5 * self.dt
        return w


def grid_for(p: "ParameterSet") -> TimeGrid:
    """Build the run grid from (t_max, dt), requiring integer step count."""
    n = int(round(p.t_max / p.dt))
    if n < 1 or abs(n * p.dt - p.t_max) > 1e-12 * max(1.0, abs(p.t_max)):
        raise ValueError(
            f"t_max = {p.t_max!r} is not an integer multiple of dt = {p.dt!r}"
        )
    return TimeGrid(dt=p.dt, n_steps=n)


@dataclass(frozen=True)
class NoiseRealization:
    """One sampled pair of discretized noise paths on the grid.

    z_star[k] = -i * g * conj(z0) * exp(i * omega_c * t_k) exactly; y_star is
    the conjugated Cholesky-colored Gaussian vector.
    """

    z_star: np.ndarray
    y_star: np.ndarray
    z0: complex


def alpha(t, s, p: "ParameterSet"):
    """Cavity-mode kernel g^2 * exp(-i * omega_c * (t - s)); broadcasts."""
    return (p.g**2) * np.exp(-1j * p.omega_c * (np.asarray(t) - np.asarray(s)))


def beta(t, s, p: "ParameterSet"):
    """Leakage kernel (Gamma*gamma/2) * exp(-gamma*|t-s|); real; broadcasts."""
    out = 0.5 * p.Gamma * p.gamma * np.exp(-p.gamma * np.abs(np.asarray(t) - np.asarray(s)))
    return out + 0.0j


def trajectory_seed_sequences(seed: int, k: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Independent (z, y) stream seeds for trajectory k.

    Pure function of (seed, k): stream identity never depends on worker
    scheduling or ensemble size.
    """
    return (
        np.random.SeedSequence(entropy=seed, spawn_key=(k, STREAM_Z)),
        np.random.SeedSequence(entropy=seed, spawn_key=(k, STREAM_Y)),
    )


def standard_complex_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    """n iid complex Gaussians with E[xi]=0, E[|xi|^2]=1, E[xi^2]=0."""
    raw = rng.standard_normal((n, 2))
    return (raw[:, 0] + 1j * raw[:, 1]) / np.sqrt(2.0)


def sample_z(rng: np.random.Generator, grid: TimeGrid, p: "ParameterSet") -> tuple[np.ndarray, complex]:
    """Draw the cavity noise path; returns (z_star sequence, z0)."""
    z0 = complex(standard_complex_normal(rng, 1)[0])
    z_star = z_path_from_amplitude(z0, grid, p)
    return z_star, z0


def z_path_from_amplitude(z0: complex, grid: TimeGrid, p: "ParameterSet") -> np.ndarray:
    """Deterministic map from the single Gaussian amplitude to the path."""
    return -1j * p.g * np.conj(z0) * np.exp(1j * p.omega_c * grid.times)


def y_covariance(grid: TimeGrid, p: "ParameterSet") -> np.ndarray:
    """Real symmetric covariance C[k,l] = beta(t_k, t_l) on the grid."""
    t = grid.times
    return 0.5 * p.Gamma * p.gamma * np.exp(-p.gamma * np.abs(t[:, None] - t[None, :]))


def y_cholesky(grid: TimeGrid, p: "ParameterSet") -> Optional[np.ndarray]:
    """Lower Cholesky factor of the grid covariance; None when Gamma == 0.

    Computed once per (grid, Gamma, gamma) and reused for every trajectory.
    """
    if p.Gamma == 0.0:
        return None
    cov = y_covariance(grid, p)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        k = _first_bad_pivot(cov)
        raise CholeskyError(
            f"kernel covariance is not positive definite on this grid: "
            f"pivot {k} is the first nonpositive one (Gamma={p.Gamma!r}, gamma={p.gamma!r})"
        ) from None


def _first_bad_pivot(cov: np.ndarray) -> int:
    """Index of the first nonpositive pivot in a plain Cholesky sweep."""
    a = cov.astype(float).copy()
    n = a.shape[0]
    for k in range(n):
        if a[k, k] <= 0.0 or not np.isfinite(a[k, k]):
            return k
        piv = np.sqrt(a[k, k])
        a[k:, k] /= piv
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k + 1 :, k])
    return n - 1


def sample_y(
    rng: np.random.Generator,
    grid: TimeGrid,
    p: "ParameterSet",
    chol: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Draw the leakage noise path y_star on the grid.

    The returned sequence satisfies E[y conj(y')] = beta and E[y y'] = 0 for
    the unstarred process y = conj(y_star).  Gamma == 0 short-circuits to an
    all-zero path without consuming random numbers.
    """
    n = grid.n_steps + 1
    if p.Gamma == 0.0:
        return np.zeros(n, dtype=np.complex128)
    if chol is None:
        chol = y_cholesky(grid, p)
    xi = standard_complex_normal(rng, n)
    return np.conj(chol @ xi)


def sample_realization(
    seed: int,
    k: int,
    grid: TimeGrid,
    p: "ParameterSet",
    chol: Optional[np.ndarray] = None,
) -> NoiseRealization:
    """Both noise paths for trajectory k of a deterministic ensemble."""
    ss_z, ss_y = trajectory_seed_sequences(seed, k)
    z_star, z0 = sample_z(np.random.default_rng(ss_z), grid, p)
    y_star = sample_y(np.random.default_rng(ss_y), grid, p, chol)
    return NoiseRealization(z_star=z_star, y_star=y_star, z0=z0)


@dataclass(frozen=True)
class MomentCheck:
    """One family of empirical moments against its target."""

    name: str
    max_deviation: float
    scale: float  # one-sigma scale of the worst deviation, already / sqrt(N)
    max_ratio: float
    flagged: bool


@dataclass(frozen=True)
class NoiseReport:
    n_paths: int
    threshold: float
    checks: tuple[MomentCheck, ...] = field(default_factory=tuple)

    @property
    def flagged(self) -> bool:
        return any(c.flagged for c in self.checks)

    def rows(self) -> list[list]:
        out = [["check", "max_deviation", "scale", "max_ratio", "threshold", "flagged"]]
        for c in self.checks:
            out.append(
                [c.name, c.max_deviation, c.scale, c.max_ratio, self.threshold, int(c.flagged)]
            )
        return out


def _moment_check(name: str, dev: np.ndarray, sigma: np.ndarray, n: int, threshold: float) -> MomentCheck:
    """Normalize |deviation| by its per-element sigma/sqrt(N) and flag the max."""
    dev = np.abs(dev)
    scale = sigma / np.sqrt(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dev == 0.0, 0.0, dev / np.where(scale > 0.0, scale, np.inf))
    idx = np.unravel_index(int(np.argmax(ratio)), ratio.shape) if ratio.size else (0,)
    worst = float(ratio[idx]) if ratio.size else 0.0
    return MomentCheck(
        name=name,
        max_deviation=float(dev[idx]) if dev.size else 0.0,
        scale=float(scale[idx]) if np.ndim(scale) else float(scale),
        max_ratio=worst,
        flagged=bool(worst > threshold),
    )


def validate_noise(
    paths: Sequence[NoiseRealization],
    p: "ParameterSet",
    grid: TimeGrid,
    threshold: float = 6.0,
) -> NoiseReport:
    """Statistical self-test of an ensemble of noise paths.

    Checks first moments against 0, second moments against the kernels, and
    pseudo-covariances against 0, each normalized by its own one-sigma
    scale / sqrt(N); deviations above `threshold` sigmas are flagged.
    """
    n = len(paths)
    if n < 100:
        raise ValueError(f"need at least 100 paths to validate, got {n}")
    t = grid.times
    # unstarred processes: conj of the stored paths
    z = np.conj(np.stack([np.asarray(q.z_star) for q in paths]))
    y = np.conj(np.stack([np.asarray(q.y_star) for q in paths]))
    if z.shape[1] != t.size or y.shape[1] != t.size:
        raise ValueError("noise paths do not match the grid length")

    a_tt = alpha(t[:, None], t[None, :], p)
    b_tt = y_covariance(grid, p)
    sig_z1 = p.g
    sig_y1 = np.sqrt(np.maximum(np.diag(b_tt), 0.0))
    g2 = p.g**2
    b_diag = np.diag(b_tt)

    checks = [
        _moment_check("mean_z", z.mean(axis=0), np.full(t.size, sig_z1), n, threshold),
        _moment_check("mean_y", y.mean(axis=0), sig_y1, n, threshold),
        # (z^dag z / n)[s, t] estimates E[z_t conj(z_s)] = alpha(t, s)
        _moment_check(
            "cov_z_vs_alpha",
            (z.conj().T @ z) / n - a_tt.T,
            np.full((t.size, t.size), g2),
            n,
            threshold,
        ),
        _moment_check(
            "cov_y_vs_beta",
            (y.conj().T @ y) / n - b_tt,
            np.sqrt(np.outer(b_diag, b_diag)),
            n,
            threshold,
        ),
        _moment_check(
            "pseudo_cov_z",
            (z.T @ z) / n,
            np.full((t.size, t.size), np.sqrt(2.0) * g2),
            n,
            threshold,
        ),
        _moment_check(
            "pseudo_cov_y",
            (y.T @ y) / n,
            np.sqrt(np.outer(b_diag, b_diag) + np.abs(b_tt) ** 2),
            n,
            threshold,
        ),
    ]
    return NoiseReport(n_paths=n, threshold=threshold, checks=tuple(checks))

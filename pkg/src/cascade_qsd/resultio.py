"""Simulation results and their delimited on-disk form.

A RESULT CSV has `#` provenance lines (artifact version, method, seed,
parameter hash, basis order, full resolved config), then a header row and
one data row per grid node.  The density matrix is stored as its upper
triangle (re/im for 0 <= i <= j <= 3); the lower triangle is implied by
Hermiticity.  Floats are written with shortest round-trip formatting, so a
file read back through `read_result_csv` reproduces the written values
bit-exactly.

Sweep output is long format: one row per (sweep value, time) with the
concurrence track only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

UPPER_PAIRS = tuple((i, j) for i in range(4) for j in range(4) if i <= j)

RESULT_COLUMNS = (
    ("t",)
    + tuple(f"rho_{part}_{i}_{j}" for (i, j) in UPPER_PAIRS for part in ("re", "im"))
    + ("trace_raw", "concurrence", "concurrence_stderr", "min_eig")
)

SWEEP_COLUMNS = ("sweep_value", "t", "concurrence", "concurrence_stderr", "trace_raw")

BASIS_COMMENT = "basis: 0=|ee> 1=|eg> 2=|ge> 3=|gg> (first letter = qubit A)"


@dataclass
class SimulationResult:
    """Reduced-state time series with derived observables and provenance."""

    times: np.ndarray  # (T+1,)
    rho: np.ndarray  # (T+1, 4, 4) trace-normalized
    rho_raw_trace: np.ndarray  # (T+1,)
    concurrence: np.ndarray  # (T+1,)
    concurrence_stderr: np.ndarray  # (T+1,)
    min_eig: np.ndarray  # (T+1,)
    provenance: dict = field(default_factory=dict)
    # batch estimate of the raw-trace scatter; diagnostic only, not serialized
    trace_stderr: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.times.shape[0]
        if self.rho.shape != (n, 4, 4):
            raise ValueError(f"rho must be ({n}, 4, 4), got {self.rho.shape}")


def _fmt(x) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))


def write_result_csv(result: SimulationResult, path, config_lines: Optional[Sequence[str]] = None) -> None:
    prov = result.provenance
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# cascade-qsd {prov.get('version', 'unknown')}\n")
        keys = ("method", "eom_variant", "seed", "n_traj", "params_hash", "flagged_trajectories")
        items = " ".join(f"{k}={prov[k]}" for k in keys if k in prov)
        fh.write(f"# {items}\n")
        fh.write(f"# {BASIS_COMMENT}\n")
        for line in config_lines or ():
            fh.write(f"# cfg: {line}\n")
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for k, t in enumerate(result.times):
            row = [_fmt(t)]
            for (i, j) in UPPER_PAIRS:
                row.append(_fmt(result.rho[k, i, j].real))
                row.append(_fmt(result.rho[k, i, j].imag))
            row.append(_fmt(result.rho_raw_trace[k]))
            row.append(_fmt(result.concurrence[k]))
            row.append(_fmt(result.concurrence_stderr[k]))
            row.append(_fmt(result.min_eig[k]))
            writer.writerow(row)


def _read_rows(path) -> tuple[list[str], list[list[str]], list[str]]:
    comments: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        for row in reader:
            if row:
                rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no header row found")
    return rows[0], rows[1:], comments


def parse_provenance(comments: Sequence[str]) -> dict:
    prov: dict = {}
    for line in comments:
        body = line.lstrip("# ").strip()
        if body.startswith("cfg:") or body.startswith("basis:"):
            continue
        for tok in body.split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                prov[k] = v
    return prov


def read_result_csv(path) -> SimulationResult:
    """Read a RESULT CSV back into memory (bit-exact for written values)."""
    header, data, comments = _read_rows(path)
    if list(header) != list(RESULT_COLUMNS):
        raise ValueError(f"{path}: unexpected header {header!r}")
    arr = np.array([[float(x) for x in row] for row in data], dtype=float)
    n = arr.shape[0]
    times = arr[:, 0]
    rho = np.zeros((n, 4, 4), dtype=np.complex128)
    col = 1
    for (i, j) in UPPER_PAIRS:
        re, im = arr[:, col], arr[:, col + 1]
        rho[:, i, j] = re + 1j * im
        if i != j:
            rho[:, j, i] = re - 1j * im
        col += 2
    return SimulationResult(
        times=times,
        rho=rho,
        rho_raw_trace=arr[:, col],
        concurrence=arr[:, col + 1],
        concurrence_stderr=arr[:, col + 2],
        min_eig=arr[:, col + 3],
        provenance=parse_provenance(comments),
    )


def write_sweep_csv(
    path,
    parameter: str,
    blocks: Sequence[tuple[float, SimulationResult]],
    provenance: Optional[dict] = None,
    config_lines: Optional[Sequence[str]] = None,
) -> None:
    """Long-format sweep output, rows ordered by sweep value then time."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        prov = provenance or {}
        fh.write(f"# cascade-qsd {prov.get('version', 'unknown')}\n")
        fh.write(f"# sweep parameter={parameter} points={len(blocks)}\n")
        keys = ("method", "eom_variant", "seed", "n_traj", "params_hash")
        items = " ".join(f"{k}={prov[k]}" for k in keys if k in prov)
        if items:
            fh.write(f"# {items}\n")
        for line in config_lines or ():
            fh.write(f"# cfg: {line}\n")
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for value, result in blocks:
            for k, t in enumerate(result.times):
                writer.writerow(
                    [
                        _fmt(value),
                        _fmt(t),
                        _fmt(result.concurrence[k]),
                        _fmt(result.concurrence_stderr[k]),
                        _fmt(result.rho_raw_trace[k]),
                    ]
                )


def read_sweep_csv(path) -> tuple[np.ndarray, dict]:
    """Read a long-format sweep CSV; returns (structured array, provenance)."""
    header, data, comments = _read_rows(path)
    if list(header) != list(SWEEP_COLUMNS):
        raise ValueError(f"{path}: unexpected sweep header {header!r}")
    arr = np.array([[float(x) for x in row] for row in data], dtype=float)
    rec = np.rec.fromarrays([arr[:, k] for k in range(arr.shape[1])], names=list(SWEEP_COLUMNS))
    return rec, parse_provenance(comments)

"""Concurrence line plots and sweep heatmaps.

Output format follows the file extension; a path without one gets `.svg`
(vector output is the default for publication use, raster on request).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from cascade_qsd_plots.csvdata import CsvTable, SchemaError, read_table


@dataclass
class PlotSpec:
    input_csv: str
    out: str
    kind: str = "lines"  # lines | heatmap
    x: str = "t"
    y: str = "sweep_value"
    value: str = "concurrence"
    stderr: str = "concurrence_stderr"
    title: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None


def _resolve_out(out: str) -> str:
    path = Path(out)
    if path.suffix == "":
        path = path.with_suffix(".svg")
    return str(path)


def _groups(table: CsvTable, spec: PlotSpec):
    """(label, x, value, stderr) per curve, one per sweep value if present."""
    x = table[spec.x]
    v = table[spec.value]
    err = table[spec.stderr] if table.has(spec.stderr) else None
    if not table.has(spec.y):
        yield None, x, v, err
        return
    g = table[spec.y]
    for val in np.unique(g):
        sel = g == val
        yield val, x[sel], v[sel], (err[sel] if err is not None else None)


def plot_lines(spec: PlotSpec) -> str:
    """One concurrence-vs-time curve per sweep value, stderr bands if known."""
    table = read_table(spec.input_csv)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for label, x, v, err in _groups(table, spec):
        name = None if label is None else f"{spec.y} = {label:g}"
        (line,) = ax.plot(x, v, lw=1.4, label=name)
        if err is not None and np.any(err > 0):
            ax.fill_between(x, v - err, v + err, alpha=0.25, color=line.get_color())
    ax.set_xlabel(spec.xlabel or spec.x)
    ax.set_ylabel(spec.ylabel or spec.value)
    ax.set_ylim(0.0, 1.05)
    if spec.title:
        ax.set_title(spec.title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False)
    out = _resolve_out(spec.out)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def pivot_rectangular(table: CsvTable, spec: PlotSpec):
    """(row values, times, value grid) for a complete (y, t) lattice."""
    y = table[spec.y]
    x = table[spec.x]
    v = table[spec.value]
    rows = np.unique(y)
    times = np.unique(x)
    grid = np.full((rows.size, times.size), np.nan)
    for yy, xx, vv in zip(y, x, v):
        i = int(np.searchsorted(rows, yy))
        j = int(np.searchsorted(times, xx))
        if not np.isnan(grid[i, j]):
            raise SchemaError(f"duplicate cell at {spec.y}={yy!r}, {spec.x}={xx!r}")
        grid[i, j] = vv
    if np.isnan(grid).any():
        i, j = np.argwhere(np.isnan(grid))[0]
        raise SchemaError(
            f"missing cell at {spec.y}={rows[i]!r}, {spec.x}={times[j]!r}: "
            "sweep coverage is not rectangular"
        )
    return rows, times, grid


def plot_heatmap(spec: PlotSpec) -> str:
    """Pixel grid: x = time, one row per sweep value, color = value in [0,1]."""
    table = read_table(spec.input_csv)
    rows, times, grid = pivot_rectangular(table, spec)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    im = ax.imshow(
        np.clip(grid, 0.0, 1.0),
        aspect="auto",
        origin="lower",
        vmin=0.0,
        vmax=1.0,
        extent=(float(times[0]), float(times[-1]), -0.5, rows.size - 0.5),
        interpolation="nearest",
    )
    ax.set_yticks(np.arange(rows.size))
    ax.set_yticklabels([f"{r:g}" for r in rows])
    ax.set_xlabel(spec.xlabel or spec.x)
    ax.set_ylabel(spec.ylabel or spec.y)
    if spec.title:
        ax.set_title(spec.title)
    fig.colorbar(im, ax=ax, label=spec.value)
    out = _resolve_out(spec.out)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out

"""Command line entry points: plot-lines and plot-heatmap."""

from __future__ import annotations

import argparse
import sys

from cascade_qsd_plots.csvdata import SchemaError
from cascade_qsd_plots.figures import PlotSpec, plot_heatmap, plot_lines


def _parser(kind: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog=f"plot-{kind}",
        description=(
            "Concurrence line plot from a RESULT or sweep CSV"
            if kind == "lines"
            else "Concurrence heatmap over (time, sweep value) from a sweep CSV"
        ),
    )
    ap.add_argument("--csv", required=True, help="input CSV file")
    ap.add_argument("--out", required=True, help="output image (extension picks the format; default .svg)")
    ap.add_argument("--x", default="t")
    ap.add_argument("--y", default="sweep_value", help="group/row column for sweeps")
    ap.add_argument("--value", default="concurrence")
    ap.add_argument("--stderr", default="concurrence_stderr")
    ap.add_argument("--title")
    ap.add_argument("--xlabel")
    ap.add_argument("--ylabel")
    return ap


def _spec(args, kind: str) -> PlotSpec:
    return PlotSpec(
        input_csv=args.csv, out=args.out, kind=kind, x=args.x, y=args.y,
        value=args.value, stderr=args.stderr, title=args.title,
        xlabel=args.xlabel, ylabel=args.ylabel,
    )


def main_lines(argv=None) -> int:
    args = _parser("lines").parse_args(argv)
    try:
        out = plot_lines(_spec(args, "lines"))
    except (SchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def main_heatmap(argv=None) -> int:
    args = _parser("heatmap").parse_args(argv)
    try:
        out = plot_heatmap(_spec(args, "heatmap"))
    except (SchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main_lines())

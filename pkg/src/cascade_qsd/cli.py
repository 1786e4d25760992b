"""Command line front end: run, sweep, compare, noise-check, dump-config.

All subcommands consume the flat config format from `cascade_qsd.config`
and emit UTF-8 CSV files with `#` provenance headers.  Sweep points run on
a process pool capped by the CASCADE_QSD_THREADS environment variable; the
output file is assembled in sweep-value order after all points finish, so
results are byte-identical whatever the worker count.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

import cascade_qsd.config as cfgmod
from cascade_qsd.coeffs import load_fields, save_fields, solve_coefficients
from cascade_qsd.config import ConfigError, RunConfig, dump_config, parse_config, params_hash
from cascade_qsd.model import ParameterError
from cascade_qsd.noise import grid_for, sample_realization, validate_noise, y_cholesky
from cascade_qsd.observables import trace_distance
from cascade_qsd.oracle import closed_system, pseudomode_lindblad
from cascade_qsd.resultio import (
    SimulationResult,
    read_result_csv,
    write_result_csv,
    write_sweep_csv,
)
from cascade_qsd.trajectory import quadrature_ensemble, run_ensemble

DEFAULT_COMPARE_THRESHOLD = 0.03


def _worker_count(n_points: int) -> int:
    env = os.environ.get("CASCADE_QSD_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"CASCADE_QSD_THREADS must be an integer, got {env!r}")
        if cap < 1:
            raise ConfigError("CASCADE_QSD_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_points))


def _load_config(path: str) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    return parse_config(text)


def _resolve_out(cfg: RunConfig, flag_value) -> str:
    if flag_value:
        return str(flag_value)
    if cfg.output_path:
        return cfg.output_path
    raise ConfigError("no output path: pass --out or set output.path in the config")


def dispatch(cfg: RunConfig, fields_cache: str | None = None) -> SimulationResult:
    """Run the configured method and return its result."""
    p = cfg.params
    if cfg.method == "oracle":
        return pseudomode_lindblad(p)
    if cfg.method == "closed":
        return closed_system(p)

    fields = None
    if fields_cache:
        cache = Path(fields_cache)
        cache.mkdir(parents=True, exist_ok=True)
        key = cache / f"fields-{params_hash(p)}-{p.eom_variant}.bin"
        if key.exists():
            fields = load_fields(key)
        else:
            fields = solve_coefficients(p, params_hash=params_hash(p))
            save_fields(fields, key)
    if cfg.method == "qsd":
        return run_ensemble(p, fields=fields)
    if cfg.method == "quadrature":
        return quadrature_ensemble(p, fields=fields)
    raise ConfigError(f"unknown method {cfg.method!r}")


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    out = _resolve_out(cfg, args.out)
    result = dispatch(cfg, args.fields_cache)
    flagged = int(result.provenance.get("flagged_trajectories", 0))
    if flagged:
        print(f"warning: {flagged} trajectories exceeded the norm threshold", file=sys.stderr)
    write_result_csv(result, out, config_lines=dump_config(cfg).splitlines())
    print(f"wrote {out} ({result.times.size} rows, method={cfg.method})")
    return 0


def _sweep_point(payload: tuple[str, float, str | None]) -> tuple[float, SimulationResult | None, str]:
    text, value, fields_cache = payload
    try:
        base = parse_config(text)
        cfg = cfgmod.with_sweep_value(base, value)
        return value, dispatch(cfg, fields_cache), ""
    except Exception:  # the sweep must survive any per-point failure
        return value, None, traceback.format_exc()


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if cfg.sweep_parameter is None:
        raise ConfigError("config has no sweep block (sweep.parameter / sweep.values)")
    out = _resolve_out(cfg, args.out)
    text = Path(args.config).read_text(encoding="utf-8")
    values = list(cfg.sweep_values)
    payloads = [(text, v, args.fields_cache) for v in values]

    workers = _worker_count(len(values))
    results: list[tuple[float, SimulationResult | None, str]] = []
    if workers == 1:
        results = [_sweep_point(pl) for pl in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, payloads))

    failures = [(v, err) for v, r, err in results if r is None]
    blocks = [(v, r) for v, r, err in results if r is not None]
    blocks.sort(key=lambda vr: vr[0])

    prov = {"method": cfg.method, "seed": cfg.params.seed, "n_traj": cfg.params.n_traj,
            "eom_variant": cfg.params.eom_variant, "params_hash": params_hash(cfg.params)}
    from cascade_qsd import __version__

    prov["version"] = __version__
    write_sweep_csv(out, cfg.sweep_parameter, blocks, provenance=prov,
                    config_lines=dump_config(cfg).splitlines())
    print(f"wrote {out} ({len(blocks)} of {len(values)} sweep points)")

    if failures:
        sidecar = out + ".failures.log"
        with open(sidecar, "w", encoding="utf-8") as fh:
            for v, err in failures:
                fh.write(f"== {cfg.sweep_parameter} = {v!r} failed ==\n{err}\n")
        print(f"{len(failures)} sweep points failed; see {sidecar}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(args) -> int:
    ra = read_result_csv(args.file_a)
    rb = read_result_csv(args.file_b)
    ta, tb = ra.times, rb.times
    if ta.size > tb.size:
        ra, rb = rb, ra
        ta, tb = tb, ta
    idx = np.searchsorted(tb, ta)
    nested = bool(np.all(idx < tb.size)) and np.array_equal(
        tb[np.minimum(idx, tb.size - 1)], ta
    )
    if ta.size < 2 or not nested:
        print("grid mismatch: time columns do not nest", file=sys.stderr)
        return 2
    dists = np.array([trace_distance(ra.rho[k], rb.rho[idx[k]]) for k in range(ta.size)])
    dconc = np.abs(ra.concurrence - rb.concurrence[idx])
    print(f"common_times = {ta.size}")
    print(f"max_trace_distance = {dists.max():.6g}")
    print(f"mean_trace_distance = {dists.mean():.6g}")
    print(f"max_abs_concurrence_diff = {dconc.max():.6g}")
    return 0 if dists.max() <= args.threshold else 1


def cmd_noise_check(args) -> int:
    cfg = _load_config(args.config)
    p = cfg.params
    grid = grid_for(p)
    chol = y_cholesky(grid, p)
    paths = [sample_realization(p.seed, k, grid, p, chol) for k in range(args.paths)]
    report = validate_noise(paths, p, grid)
    out = args.out or (_resolve_out(cfg, None) if cfg.output_path else None)
    rows = report.rows()
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# noise-check paths={report.n_paths} threshold={report.threshold}\n")
            csv.writer(fh).writerows(rows)
        print(f"wrote {out}")
    else:
        writer = csv.writer(sys.stdout)
        writer.writerows(rows)
    if report.flagged:
        print("noise validation FLAGGED deviations", file=sys.stderr)
        return 1
    return 0


def cmd_dump_config(args) -> int:
    cfg = _load_config(args.config)
    sys.stdout.write(dump_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cascade-qsd",
        description="Two-qubit leaky-cavity simulator: trajectory ensembles, "
        "exact references, sweeps, and CSV reports.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one configuration and write a RESULT CSV")
    runp.add_argument("config")
    runp.add_argument("--out", help="output CSV path (overrides output.path)")
    runp.add_argument("--fields-cache", help="directory for reusable coefficient-field dumps")
    runp.set_defaults(func=cmd_run)

    swp = sub.add_parser("sweep", help="run a parameter sweep and write a long-format CSV")
    swp.add_argument("config")
    swp.add_argument("--out", help="output CSV path (overrides output.path)")
    swp.add_argument("--fields-cache", help="directory for reusable coefficient-field dumps")
    swp.set_defaults(func=cmd_sweep)

    cmp_ = sub.add_parser("compare", help="compare two RESULT CSVs on nested time grids")
    cmp_.add_argument("file_a")
    cmp_.add_argument("file_b")
    cmp_.add_argument("--threshold", type=float, default=DEFAULT_COMPARE_THRESHOLD,
                      help="max trace distance for exit status 0")
    cmp_.set_defaults(func=cmd_compare)

    nc = sub.add_parser("noise-check", help="sample noise paths and validate their statistics")
    nc.add_argument("config")
    nc.add_argument("--paths", type=int, default=10000)
    nc.add_argument("--out", help="write the report CSV here instead of stdout")
    nc.set_defaults(func=cmd_noise_check)

    dc = sub.add_parser("dump-config", help="echo the canonical resolved configuration")
    dc.add_argument("config")
    dc.set_defaults(func=cmd_dump_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # diagnostics on the error stream, nonzero exit
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

"""Run configuration: a flat line-oriented `section.key = value` format.

The format is deliberately trivial: one assignment per line, `#` starts a
comment, no nesting, no quoting.  Unknown and duplicate keys are rejected;
missing required keys are reported all at once.  `dump_config` emits a
canonical rendering (fixed key order, defaults resolved, shortest
round-trip floats) that re-parses to an equal RunConfig.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

from cascade_qsd.model import (
    EOM_VARIANTS,
    INITIAL_STATES,
    METHODS,
    ParameterError,
    ParameterSet,
)


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


SWEEPABLE = ("g", "gamma", "Gamma", "omega_s")

REQUIRED_KEYS = (
    "model.g",
    "model.kappa1",
    "model.kappa2",
    "model.omega_s",
    "bath.Gamma",
    "bath.gamma",
    "sim.t_max",
    "sim.dt",
    "sim.n_traj",
    "sim.seed",
    "sim.initial_state",
    "sim.method",
)

OPTIONAL_KEYS = (
    "model.omega_a",
    "model.omega_b",
    "model.omega_cavity",
    "sim.eom_variant",
    "sim.quadrature_nodes",
    "sim.initial_amplitudes",
    "oracle.fock_cutoff_cavity",
    "oracle.fock_cutoff_pseudomode",
    "sweep.parameter",
    "sweep.values",
    "output.path",
)

KNOWN_KEYS = frozenset(REQUIRED_KEYS) | frozenset(OPTIONAL_KEYS)

# ParameterSet field -> config key, used to attribute domain errors
FIELD_KEY = {
    "omega_s": "model.omega_s",
    "omega_a": "model.omega_a",
    "omega_b": "model.omega_b",
    "omega_c": "model.omega_cavity",
    "g": "model.g",
    "kappa1": "model.kappa1",
    "kappa2": "model.kappa2",
    "Gamma": "bath.Gamma",
    "gamma": "bath.gamma",
    "t_max": "sim.t_max",
    "dt": "sim.dt",
    "n_traj": "sim.n_traj",
    "seed": "sim.seed",
    "initial_state": "sim.initial_state",
    "initial_amplitudes": "sim.initial_amplitudes",
    "eom_variant": "sim.eom_variant",
    "quadrature_nodes": "sim.quadrature_nodes",
    "fock_cutoff_cavity": "oracle.fock_cutoff_cavity",
    "fock_cutoff_pseudomode": "oracle.fock_cutoff_pseudomode",
}


@dataclass(frozen=True)
class RunConfig:
    """A parsed configuration: parameters plus dispatch and output choices."""

    params: ParameterSet
    method: str
    sweep_parameter: Optional[str] = None
    sweep_values: Optional[tuple[float, ...]] = None
    output_path: Optional[str] = None


def _scan(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"line {lineno}: key must look like 'section.key', got {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _float(pairs: dict[str, str], key: str) -> float:
    try:
        return float(pairs[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {pairs[key]!r}") from None


def _int(pairs: dict[str, str], key: str) -> int:
    try:
        return int(pairs[key], 0)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {pairs[key]!r}") from None


def _float_list(text: str, key: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise ConfigError(f"{key}: not a comma-separated number list: {text!r}") from None
    if not values:
        raise ConfigError(f"{key}: empty list")
    return values


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    pairs = _scan(text)
    missing = [k for k in REQUIRED_KEYS if k not in pairs]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    method = pairs["sim.method"]
    if method not in METHODS:
        raise ConfigError(f"sim.method: must be one of {METHODS}, got {method!r}")
    state = pairs["sim.initial_state"]
    if state not in INITIAL_STATES:
        raise ConfigError(f"sim.initial_state: must be one of {INITIAL_STATES}, got {state!r}")
    variant = pairs.get("sim.eom_variant", "as_printed")
    if variant not in EOM_VARIANTS:
        raise ConfigError(f"sim.eom_variant: must be one of {EOM_VARIANTS}, got {variant!r}")

    amplitudes = None
    if "sim.initial_amplitudes" in pairs:
        flat = _float_list(pairs["sim.initial_amplitudes"], "sim.initial_amplitudes")
        if len(flat) != 8:
            raise ConfigError(
                "sim.initial_amplitudes: need 8 numbers (re0,im0,...,re3,im3), "
                f"got {len(flat)}"
            )
        amplitudes = tuple(complex(flat[2 * k], flat[2 * k + 1]) for k in range(4))

    kwargs = dict(
        omega_s=_float(pairs, "model.omega_s"),
        g=_float(pairs, "model.g"),
        kappa1=_float(pairs, "model.kappa1"),
        kappa2=_float(pairs, "model.kappa2"),
        Gamma=_float(pairs, "bath.Gamma"),
        gamma=_float(pairs, "bath.gamma"),
        t_max=_float(pairs, "sim.t_max"),
        dt=_float(pairs, "sim.dt"),
        n_traj=_int(pairs, "sim.n_traj"),
        seed=_int(pairs, "sim.seed"),
        initial_state=state,
        eom_variant=variant,
        initial_amplitudes=amplitudes,
    )
    if "model.omega_a" in pairs:
        kwargs["omega_a"] = _float(pairs, "model.omega_a")
    if "model.omega_b" in pairs:
        kwargs["omega_b"] = _float(pairs, "model.omega_b")
    if "model.omega_cavity" in pairs:
        kwargs["omega_c"] = _float(pairs, "model.omega_cavity")
    if "sim.quadrature_nodes" in pairs:
        kwargs["quadrature_nodes"] = _int(pairs, "sim.quadrature_nodes")
    if "oracle.fock_cutoff_cavity" in pairs:
        kwargs["fock_cutoff_cavity"] = _int(pairs, "oracle.fock_cutoff_cavity")
    if "oracle.fock_cutoff_pseudomode" in pairs:
        kwargs["fock_cutoff_pseudomode"] = _int(pairs, "oracle.fock_cutoff_pseudomode")

    params = _build_params(kwargs)

    sweep_parameter = pairs.get("sweep.parameter")
    sweep_values = None
    if (sweep_parameter is None) != ("sweep.values" not in pairs):
        raise ConfigError("sweep.parameter and sweep.values must be given together")
    if sweep_parameter is not None:
        if sweep_parameter not in SWEEPABLE:
            raise ConfigError(
                f"sweep.parameter: must be one of {SWEEPABLE}, got {sweep_parameter!r}"
            )
        sweep_values = _float_list(pairs["sweep.values"], "sweep.values")
        for v in sweep_values:
            if v != v or v in (float("inf"), float("-inf")):
                raise ConfigError(f"sweep.values: value {v!r} is not finite")
            _build_params({**kwargs, _sweep_field(sweep_parameter): v})

    return RunConfig(
        params=params,
        method=method,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        output_path=pairs.get("output.path"),
    )


def _sweep_field(parameter: str) -> str:
    return {"g": "g", "gamma": "gamma", "Gamma": "Gamma", "omega_s": "omega_s"}[parameter]


def _build_params(kwargs: dict) -> ParameterSet:
    try:
        return ParameterSet(**kwargs)
    except ParameterError as err:
        field = str(err).split()[0]
        key = FIELD_KEY.get(field, field)
        raise ConfigError(f"{key}: {err}") from None


def with_sweep_value(cfg: RunConfig, value: float) -> RunConfig:
    """The per-point configuration of a sweep."""
    if cfg.sweep_parameter is None:
        raise ConfigError("configuration has no sweep block")
    from dataclasses import replace

    params = replace(cfg.params, **{_sweep_field(cfg.sweep_parameter): value})
    return RunConfig(
        params=params,
        method=cfg.method,
        sweep_parameter=None,
        sweep_values=None,
        output_path=cfg.output_path,
    )


def _fmt(x) -> str:
    return repr(float(x))


def dump_config(cfg: RunConfig) -> str:
    """Canonical rendering; re-parses to an equal RunConfig."""
    p = cfg.params
    lines = [
        f"model.omega_s = {_fmt(p.omega_s)}",
        f"model.omega_a = {_fmt(p.omega_a)}",
        f"model.omega_b = {_fmt(p.omega_b)}",
        f"model.omega_cavity = {_fmt(p.omega_c)}",
        f"model.g = {_fmt(p.g)}",
        f"model.kappa1 = {_fmt(p.kappa1)}",
        f"model.kappa2 = {_fmt(p.kappa2)}",
        f"bath.Gamma = {_fmt(p.Gamma)}",
        f"bath.gamma = {_fmt(p.gamma)}",
        f"sim.t_max = {_fmt(p.t_max)}",
        f"sim.dt = {_fmt(p.dt)}",
        f"sim.n_traj = {p.n_traj}",
        f"sim.seed = {p.seed}",
        f"sim.initial_state = {p.initial_state}",
        f"sim.method = {cfg.method}",
        f"sim.eom_variant = {p.eom_variant}",
        f"sim.quadrature_nodes = {p.quadrature_nodes}",
        f"oracle.fock_cutoff_cavity = {p.fock_cutoff_cavity}",
        f"oracle.fock_cutoff_pseudomode = {p.fock_cutoff_pseudomode}",
    ]
    if p.initial_amplitudes is not None:
        flat = []
        for a in p.initial_amplitudes:
            flat.extend([_fmt(a.real), _fmt(a.imag)])
        lines.append("sim.initial_amplitudes = " + ",".join(flat))
    if cfg.sweep_parameter is not None:
        lines.append(f"sweep.parameter = {cfg.sweep_parameter}")
        lines.append("sweep.values = " + ",".join(_fmt(v) for v in cfg.sweep_values))
    if cfg.output_path is not None:
        lines.append(f"output.path = {cfg.output_path}")
    return "\n".join(lines) + "\n"


def params_hash(p: ParameterSet) -> str:
    """Short stable digest of the physical and numerical parameters.

    Dispatch choices (method, sweep, output path) are excluded so that a
    trajectory run and its exact reference share the hash.
    """
    parts = [
        _fmt(p.omega_s), _fmt(p.omega_a), _fmt(p.omega_b), _fmt(p.omega_c),
        _fmt(p.g), _fmt(p.kappa1), _fmt(p.kappa2),
        _fmt(p.Gamma), _fmt(p.gamma),
        _fmt(p.t_max), _fmt(p.dt), str(p.n_traj), str(p.seed),
        p.initial_state, p.eom_variant, str(p.quadrature_nodes),
        str(p.fock_cutoff_cavity), str(p.fock_cutoff_pseudomode),
    ]
    if p.initial_amplitudes is not None:
        for a in p.initial_amplitudes:
            parts.extend([_fmt(a.real), _fmt(a.imag)])
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()
    return digest[:16]

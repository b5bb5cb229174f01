"""Command-line front end: JSON config in, reproducible CSV/JSON artifacts out.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 failed
verification assertion.  Artifacts contain only deterministic content;
wall-clock duration goes to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .lattice import as_dims, coupling_profile, mirror_site, pst_time
from .dynamics import (
    AmplitudeVector,
    apply_propagator,
    disorder_perturb,
    fidelity_sweep,
    lattice_hamiltonian,
    propagator_numeric,
    transfer_amplitude,
)
from .fock import ModeIndex, PolynomialFunction
from .dressing import DressingSpec, dressed_transfer_check
from . import verify as verify_mod

KINDS = ("couplings", "evolve", "fidelity", "sweep", "disorder", "dressing", "verify")
_AXIS_NAMES = ("j", "k", "n")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    dims: tuple | None = None
    j: tuple | None = None
    statistics: str = "boson"
    spinful: bool = False
    function: tuple | None = None
    source: tuple | None = None
    target: tuple | None = None
    time: float | None = None
    time_grid: tuple | None = None
    theta: float = 0.5
    epsilon: float = 0.01
    seed: int = 0
    trials: int = 20
    out: str | None = None
    format: str = "json"


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)} - {"kind"}


def _as_int_tuple(name, value):
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"config field '{name}' must be a list of integers")


def _build_config(kind: str, raw: dict) -> ExperimentConfig:
    cfg = ExperimentConfig(kind=kind)
    for key, value in raw.items():
        if key == "kind":
            if value != kind:
                raise ConfigError(f"config field 'kind' is {value!r}, subcommand is {kind!r}")
            continue
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config field '{key}'")
        setattr(cfg, key, value)
    # normalize and type-check
    if cfg.dims is not None:
        cfg.dims = _as_int_tuple("dims", cfg.dims)
    if cfg.j is not None:
        if np.isscalar(cfg.j):
            cfg.j = (float(cfg.j),)
        else:
            try:
                cfg.j = tuple(float(v) for v in cfg.j)
            except (TypeError, ValueError):
                raise ConfigError("config field 'j' must be a number or list of numbers")
    for name in ("source", "target"):
        value = getattr(cfg, name)
        if value is not None:
            setattr(cfg, name, _as_int_tuple(name, value))
    for name in ("time", "theta", "epsilon"):
        value = getattr(cfg, name)
        if value is not None:
            try:
                setattr(cfg, name, float(value))
            except (TypeError, ValueError):
                raise ConfigError(f"config field '{name}' must be a number")
    for name in ("seed", "trials"):
        value = getattr(cfg, name)
        try:
            setattr(cfg, name, int(value))
        except (TypeError, ValueError):
            raise ConfigError(f"config field '{name}' must be an integer")
    if cfg.statistics not in ("boson", "fermion", "hardcore"):
        raise ConfigError(f"config field 'statistics' must be boson|fermion|hardcore, "
                          f"got {cfg.statistics!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"config field 'format' must be csv or json, got {cfg.format!r}")
    cfg.spinful = bool(cfg.spinful)
    return cfg


def _require(cfg: ExperimentConfig, name: str):
    value = getattr(cfg, name)
    if value is None:
        raise ConfigError(f"config field '{name}' is required for '{cfg.kind}'")
    return value


def _axis_scales(cfg: ExperimentConfig, n_axes: int) -> tuple:
    if cfg.j is None:
        return (1.0,) * n_axes
    if len(cfg.j) == 1:
        return cfg.j * n_axes
    if len(cfg.j) != n_axes:
        raise ConfigError(f"config field 'j' needs 1 or {n_axes} entries, got {len(cfg.j)}")
    return cfg.j


def _polynomial(cfg: ExperimentConfig) -> PolynomialFunction:
    if cfg.function is None:
        return PolynomialFunction.linear()
    terms = []
    for i, term in enumerate(cfg.function):
        try:
            coeff = term["coeff"]
            powers = term.get("powers", [])
            if isinstance(coeff, (list, tuple)):
                coeff = complex(float(coeff[0]), float(coeff[1]))
            else:
                coeff = complex(float(coeff), 0.0)
            terms.append((coeff, tuple(int(p) for p in powers)))
        except (TypeError, KeyError, ValueError, IndexError):
            raise ConfigError(f"config field 'function' term {i} must be "
                              "{'coeff': [re, im], 'powers': [ints]}")
    return PolynomialFunction(tuple(terms))


def _default_time(cfg: ExperimentConfig, scales) -> float:
    return cfg.time if cfg.time is not None else pst_time(scales[0])


def _run_couplings(cfg: ExperimentConfig):
    dims = as_dims(_require(cfg, "dims"))
    scales = _axis_scales(cfg, dims.n_axes)
    rows = []
    for axis, (extent, J) in enumerate(zip(dims.extents, scales)):
        prof = coupling_profile(extent, J, axis=axis)
        for j, value in enumerate(prof.values, start=1):
            rows.append(([axis + 1] if dims.n_axes > 1 else []) + [j, float(value)])
    columns = (["axis"] if dims.n_axes > 1 else []) + ["j", "value"]
    return {}, (columns, rows)


def _run_evolve(cfg: ExperimentConfig):
    dims = as_dims(_require(cfg, "dims"))
    scales = _axis_scales(cfg, dims.n_axes)
    source = cfg.source or (1,) * dims.n_axes
    t = _default_time(cfg, scales)
    state = apply_propagator(dims, scales, AmplitudeVector.unit(dims, source), t)
    columns = list(_AXIS_NAMES[:dims.n_axes]) + ["re", "im"]
    rows = [list(site) + [amp.real, amp.imag]
            for site, amp in zip(dims.sites(), state.entries)]
    return {"time": t}, (columns, rows)


def _run_fidelity(cfg: ExperimentConfig):
    dims = as_dims(_require(cfg, "dims"))
    scales = _axis_scales(cfg, dims.n_axes)
    source = cfg.source or (1,) * dims.n_axes
    target = cfg.target or mirror_site(source, dims)
    t = _default_time(cfg, scales)
    amp = transfer_amplitude(dims, scales, source, target, t)
    return {"time": t, "fidelity": abs(amp) ** 2, "amplitude": amp}, None


def _time_grid(cfg: ExperimentConfig):
    grid = _require(cfg, "time_grid")
    if isinstance(grid, dict):
        try:
            return np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError("config field 'time_grid' dict needs start, stop, num")
    try:
        return np.asarray([float(t) for t in grid])
    except (TypeError, ValueError):
        raise ConfigError("config field 'time_grid' must be a list or start/stop/num dict")


def _run_sweep(cfg: ExperimentConfig):
    dims = as_dims(_require(cfg, "dims"))
    scales = _axis_scales(cfg, dims.n_axes)
    source = cfg.source or (1,) * dims.n_axes
    target = cfg.target or mirror_site(source, dims)
    series = fidelity_sweep(dims, scales, source, target, _time_grid(cfg))
    return {}, (["t", "fidelity"], [[float(t), float(f)] for t, f in series])


def _run_disorder(cfg: ExperimentConfig):
    dims = as_dims(_require(cfg, "dims"))
    scales = _axis_scales(cfg, dims.n_axes)
    source = cfg.source or (1,) * dims.n_axes
    target = cfg.target or mirror_site(source, dims)
    t = _default_time(cfg, scales)
    src, tgt = dims.flat_index(source), dims.flat_index(target)
    rows = []
    for trial in range(cfg.trials):
        profiles = []
        for axis, (extent, J) in enumerate(zip(dims.extents, scales)):
            seed = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(trial, axis))
            profiles.append(disorder_perturb(coupling_profile(extent, J, axis=axis),
                                             cfg.epsilon, seed))
        u = propagator_numeric(lattice_hamiltonian(dims, profiles=profiles), t).matrix
        rows.append([trial, float(abs(u[tgt, src]) ** 2)])
    return {"time": t, "epsilon": cfg.epsilon}, (["trial", "fidelity"], rows)


def _run_dressing(cfg: ExperimentConfig):
    dims = as_dims(_require(cfg, "dims"))
    scales = _axis_scales(cfg, dims.n_axes)
    t = _default_time(cfg, scales)
    f = _polynomial(cfg)
    anchors = [ModeIndex(cfg.source or (1,) * dims.n_axes)]
    rep = dressed_transfer_check(dims, DressingSpec.lz(cfg.theta), f, anchors, t,
                                 Js=scales, statistics=cfg.statistics)
    scalars = {"time": t, "theta": cfg.theta, "fidelity": rep.fidelity,
               "phase_residual": rep.residual, "fitted_phase": rep.phase}
    if rep.stated_phase is not None:
        scalars["stated_phase"] = rep.stated_phase
    return scalars, None


def _run_verify(cfg: ExperimentConfig):
    results = verify_mod.run_all(echo=print)
    columns = ["criterion", "name", "passed", "measure", "value"]
    rows = []
    for r in results:
        for key, value in r.details.items():
            rows.append([r.index, r.name, int(r.passed), key, float(value)])
    scalars = {"criteria_passed": sum(r.passed for r in results),
               "criteria_total": len(results)}
    return scalars, (columns, rows)


_HANDLERS = {
    "couplings": _run_couplings,
    "evolve": _run_evolve,
    "fidelity": _run_fidelity,
    "sweep": _run_sweep,
    "disorder": _run_disorder,
    "dressing": _run_dressing,
    "verify": _run_verify,
}


def _config_hash(cfg: ExperimentConfig) -> str:
    payload = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    text = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()


def _float_17g(x: float) -> str:
    text = format(float(x), ".17g")
    if not any(c in text for c in ".enan"):
        text += ".0"
    return text


def _emit_csv(scalars: dict, series, out) -> str:
    def cell(v):
        if isinstance(v, float):
            return _float_17g(v)
        return str(v)

    if series is not None:
        columns, rows = series["columns"], series["rows"]
    else:
        columns, row = [], []
        for key, value in scalars.items():
            if isinstance(value, complex):
                columns += [f"{key}_re", f"{key}_im"]
                row += [value.real, value.imag]
            else:
                columns.append(key)
                row.append(value)
        rows = [row]
    lines = [",".join(columns)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _emit_json(record: dict) -> str:
    def convert(obj):
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [convert(v) for v in obj]
        return _jsonable(obj)

    return json.dumps(convert(record), indent=2) + "\n"


def emit(record: dict, fmt: str, path: str | None) -> None:
    """Serialize a result record; CSV is tabular, JSON mirrors the full record."""
    if fmt == "csv":
        text = _emit_csv(record["scalars"], record.get("series"), path)
    else:
        text = _emit_json(record)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_set(items) -> dict:
    overrides = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pftsim",
        description="Engineered-lattice transfer experiments with reproducible artifacts.")
    parser.add_argument("--version", action="version", version=f"pftsim {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} experiment")
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a scalar config field (JSON-parsed value)")
        sp.add_argument("--out", help="artifact path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), help="artifact format")
        sp.add_argument("--seed", type=int, help="random seed override")
    return parser


def run(kind: str, raw_config: dict) -> tuple[dict, int]:
    """Execute one experiment; returns (result record, exit code)."""
    cfg = _build_config(kind, raw_config)
    start = time.perf_counter()
    scalars, series = _HANDLERS[kind](cfg)
    duration = time.perf_counter() - start
    record = {
        "config_hash": _config_hash(cfg),
        "version": __version__,
        "kind": kind,
        "scalars": scalars,
    }
    if series is not None:
        record["series"] = {"columns": series[0], "rows": series[1]}
    code = 0
    if kind == "verify" and scalars["criteria_passed"] < scalars["criteria_total"]:
        code = 3
    return record, code, duration, cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    raw = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}")
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}")
            if not isinstance(raw, dict):
                raise ConfigError("config file must hold a JSON object")
        raw.update(_parse_set(args.set))
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.out is not None:
            raw["out"] = args.out
        if args.format is not None:
            raw["format"] = args.format
        out = raw.pop("out", None)
        fmt = raw.pop("format", "json")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"config field 'format' must be csv or json, got {fmt!r}")
        record, code, duration, _ = run(args.kind, raw)
        emit(record, fmt, out)
        print(f"{args.kind}: done in {duration:.3f}s", file=sys.stderr)
        return code
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

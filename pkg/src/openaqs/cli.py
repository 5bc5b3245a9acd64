"""Batch front-end for sweep runs.

Subcommands mirror the library modules: model, renorm, critical, rates,
dynamics, bogoliubov. Each run reads one TOML config, validates it, executes
the requested grid (optionally across worker processes), and writes CSV or
JSON data files plus a manifest. Data files are deterministic: equal configs
give byte-identical output, and parallel execution gathers results by grid
index so worker scheduling never leaks into the files. The manifest carries
the config echo, package versions, and wall time, and is the only file that
may differ between repeated runs.

Exit codes: 0 success, 2 config error (diagnostics are line-anchored into the
config file), 3 numerical failure (the failing grid point is named).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy
import tomli

from . import __version__
from .bath import BathSpec, CutoffForm, validity_check
from .bogoliubov import QuadraticHamiltonian, diagonalize, verify_canonical
from .critical import critical_temperature, power_law_fit
from .dynamics import (
    DephasingParams,
    ScheduleKind,
    evolve_closed,
    evolve_dephasing,
    make_local_schedule,
    make_schedule,
    time_to_target,
)
from .model import SearchInstance, gap, two_level_params
from .rates import RateMethod, golden_rule_single, golden_rule_two, incoherent_rate, splitting_from_size
from .renorm import Process, classify

WORKERS_ENV = "OPENAQS_WORKERS"
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SUBCOMMANDS = ("model", "renorm", "critical", "rates", "dynamics", "bogoliubov")

_FLOAT = ("float",)
_INT = ("int",)
_NUMBER_LIST = ("list",)
_STR = ("str",)
_BOOL = ("bool",)

# Key schema per table: name -> kind. Unknown tables or keys are config errors
# so typos fail loudly instead of silently running defaults.
_SCHEMAS = {
    "output": {"path": _STR, "format": _STR},
    "bath": {
        "alpha": _FLOAT,
        "eta": _FLOAT,
        "omega_c": _FLOAT,
        "temperature": _FLOAT,
        "cutoff": _STR,
        "e0": _FLOAT,
        "e_level": _FLOAT,
    },
    "instance": {"n_sites": _INT, "e0": _FLOAT},
    "model": {"n_grid": _NUMBER_LIST, "s_points": _INT},
    "renorm": {"delta": _FLOAT, "delta_grid": _NUMBER_LIST, "process": _STR, "p": _FLOAT},
    "critical": {
        "eta_grid": _NUMBER_LIST,
        "n_grid": _NUMBER_LIST,
        "temperature_grid": _NUMBER_LIST,
        "process": _STR,
        "p": _FLOAT,
        "boundary": _BOOL,
        "fit": _BOOL,
    },
    "rates": {
        "method": _STR,
        "n_grid": _NUMBER_LIST,
        "epsilon": _FLOAT,
        "stimulated": _BOOL,
        "fit": _BOOL,
    },
    "dynamics": {
        "schedule": _STR,
        "total_time": _FLOAT,
        "adiabaticity": _FLOAT,
        "gamma_phi": _FLOAT,
        "rtol": _FLOAT,
        "samples": _INT,
        "runtime_scaling": _BOOL,
        "target_success": _FLOAT,
        "n_grid": _NUMBER_LIST,
    },
    "bogoliubov": {"matrix": _STR},
}

_DEFAULTS = {
    "output": {"path": None, "format": "csv"},
    "bath": {
        "alpha": 0.1,
        "eta": 1.0,
        "omega_c": 10.0,
        "temperature": 0.0,
        "cutoff": "exponential",
        "e0": 1.0,
        "e_level": None,
    },
    "instance": {"n_sites": 64, "e0": 1.0},
    "model": {"n_grid": None, "s_points": 201},
    "renorm": {"delta": 0.01, "delta_grid": None, "process": "combined", "p": 10.0},
    "critical": {
        "eta_grid": None,
        "n_grid": [256, 4096, 65536, 1048576, 16777216],
        "temperature_grid": [],
        "process": "combined",
        "p": 10.0,
        "boundary": True,
        "fit": True,
    },
    "rates": {
        "method": "golden-single",
        "n_grid": [256, 1024, 4096, 16384, 65536],
        "epsilon": 0.0,
        "stimulated": False,
        "fit": True,
    },
    "dynamics": {
        "schedule": "local-adiabatic",
        "total_time": 0.0,
        "adiabaticity": 1.0,
        "gamma_phi": 0.0,
        "rtol": 1e-10,
        "samples": 200,
        "runtime_scaling": False,
        "target_success": 0.9,
        "n_grid": [64, 256, 1024, 8192],
    },
    "bogoliubov": {"matrix": None},
}


class ConfigError(Exception):
    pass


@dataclass
class GridPointError(Exception):
    index: int
    label: str
    cause: Exception

    def __str__(self):
        return f"grid point {self.index} ({self.label}): {self.cause}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    key: str  # dotted path, e.g. "bath.eta"
    message: str


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict
    output: str | None
    fmt: str
    workers: int
    source: Path | None = None
    raw: str = ""
    tables: dict = field(default_factory=dict)


def _resolve_workers(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def load_config(subcommand: str, args: argparse.Namespace) -> RunConfig:
    """Read the TOML file (if any) and fold in command-line overrides."""
    raw = ""
    tables: dict = {}
    source = None
    if args.config is not None:
        source = Path(args.config)
        try:
            raw = source.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
        try:
            tables = tomli.loads(raw)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{source}: {exc}") from exc

    out_table = tables.get("output", {}) if isinstance(tables.get("output", {}), dict) else {}
    output = args.output if args.output is not None else out_table.get("path")
    fmt = args.format if args.format is not None else out_table.get("format", "csv")
    workers = _resolve_workers(args.workers)
    if getattr(args, "runtime_scaling", False):
        tables.setdefault("dynamics", {})["runtime_scaling"] = True

    return RunConfig(
        subcommand=subcommand,
        parameters=tables,
        output=output,
        fmt=fmt,
        workers=workers,
        source=source,
        raw=raw,
        tables=tables,
    )


def _anchor_line(raw: str, key: str) -> int:
    """Best-effort line number of a dotted key in the raw config text."""
    leaf = key.rsplit(".", 1)[-1]
    pattern = re.compile(rf"^\s*(\[+\s*)?{re.escape(leaf)}\s*[\]=.]")
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if pattern.match(line):
            return lineno
    return 1


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def effective_config(cfg: RunConfig) -> dict:
    """Parameters with every default filled in; echoed into the manifest."""
    merged = {}
    for table in ("output", "bath", "instance", cfg.subcommand):
        vals = dict(_DEFAULTS[table])
        user = cfg.parameters.get(table, {})
        if isinstance(user, dict):
            for k in _SCHEMAS[table]:
                if k in user:
                    vals[k] = user[k]
        merged[table] = vals
    merged["output"]["path"] = cfg.output
    merged["output"]["format"] = cfg.fmt
    if cfg.subcommand == "model" and merged["model"]["n_grid"] is None:
        merged["model"]["n_grid"] = [merged["instance"]["n_sites"]]
    if cfg.subcommand == "renorm" and merged["renorm"]["delta_grid"] is None:
        merged["renorm"]["delta_grid"] = [merged["renorm"]["delta"]]
    if cfg.subcommand == "critical" and merged["critical"]["eta_grid"] is None:
        merged["critical"]["eta_grid"] = [merged["bath"]["eta"]]
    return merged


def _bath_from(merged: dict) -> BathSpec:
    b = merged["bath"]
    return BathSpec(
        alpha=float(b["alpha"]),
        eta=float(b["eta"]),
        omega_c=float(b["omega_c"]),
        cutoff=CutoffForm(b["cutoff"]),
        T=float(b["temperature"]),
        E0=float(b["e0"]),
        E=None if b["e_level"] is None else float(b["e_level"]),
    )


def validate(cfg: RunConfig) -> list[Diagnostic]:
    """Schema and physics checks. Errors block the run; warnings do not."""
    diags: list[Diagnostic] = []

    def err(key, msg):
        diags.append(Diagnostic("error", key, msg))

    def warn(key, msg):
        diags.append(Diagnostic("warning", key, msg))

    allowed = {"output", "bath", "instance", cfg.subcommand}
    for table, content in cfg.parameters.items():
        if table not in allowed:
            err(table, f"unknown table [{table}] for subcommand {cfg.subcommand}")
            continue
        if not isinstance(content, dict):
            err(table, f"[{table}] must be a table")
            continue
        schema = _SCHEMAS[table]
        for k, v in content.items():
            if k not in schema:
                err(f"{table}.{k}", f"unknown key {k!r} in [{table}]")
                continue
            kind = schema[k]
            if kind is _FLOAT and not _is_number(v):
                err(f"{table}.{k}", "must be a number")
            elif kind is _INT and not (isinstance(v, int) and not isinstance(v, bool)):
                err(f"{table}.{k}", "must be an integer")
            elif kind is _NUMBER_LIST and not (
                isinstance(v, list) and all(_is_number(x) for x in v)
            ):
                err(f"{table}.{k}", "must be a list of numbers")
            elif kind is _STR and not isinstance(v, str):
                err(f"{table}.{k}", "must be a string")
            elif kind is _BOOL and not isinstance(v, bool):
                err(f"{table}.{k}", "must be a boolean")
    if any(d.severity == "error" for d in diags):
        return diags

    merged = effective_config(cfg)
    bath = merged["bath"]
    if bath["eta"] <= 0:
        err("bath.eta", "η must be positive")
    if bath["alpha"] < 0:
        err("bath.alpha", "alpha must be nonnegative")
    if bath["omega_c"] <= 0:
        err("bath.omega_c", "omega_c must be positive")
    if bath["temperature"] < 0:
        err("bath.temperature", "temperature must be nonnegative")
    if bath["e0"] <= 0:
        err("bath.e0", "e0 must be positive")
    if bath["e_level"] is not None and bath["e_level"] <= 0:
        err("bath.e_level", "e_level must be positive")
    if bath["cutoff"] not in ("exponential", "hard"):
        err("bath.cutoff", f"cutoff must be 'exponential' or 'hard', got {bath['cutoff']!r}")
    inst = merged["instance"]
    if inst["n_sites"] < 2:
        err("instance.n_sites", "n_sites must be at least 2")
    if inst["e0"] <= 0:
        err("instance.e0", "e0 must be positive")

    def check_n_grid(key, grid, need_fit=False):
        if len(grid) == 0:
            err(key, "grid must not be empty")
            return
        if any(int(n) != n or n < 2 for n in grid):
            err(key, "entries must be integers >= 2")
            return
        if need_fit:
            if len(grid) < 4:
                err(key, "need at least 4 grid points for a power-law fit")
            elif max(grid) / min(grid) < 100:
                err(key, "grid must span at least two decades for a power-law fit")

    sub = merged[cfg.subcommand] if cfg.subcommand in merged else {}

    if cfg.subcommand == "model":
        check_n_grid("model.n_grid", sub["n_grid"])
        if sub["s_points"] < 2:
            err("model.s_points", "s_points must be at least 2")

    elif cfg.subcommand == "renorm":
        if sub["p"] < 2:
            err("renorm.p", "p must be at least 2")
        if sub["process"] not in ("single", "two", "combined"):
            err("renorm.process", f"process must be single, two, or combined, got {sub['process']!r}")
        if len(sub["delta_grid"]) == 0:
            err("renorm.delta_grid", "grid must not be empty")
        elif any(d <= 0 for d in sub["delta_grid"]):
            err("renorm.delta_grid", "splittings must be positive")

    elif cfg.subcommand == "critical":
        if sub["p"] < 2:
            err("critical.p", "p must be at least 2")
        if sub["process"] not in ("single", "two", "combined"):
            err("critical.process", f"process must be single, two, or combined, got {sub['process']!r}")
        if len(sub["eta_grid"]) == 0:
            err("critical.eta_grid", "grid must not be empty")
        elif any(e <= 0 for e in sub["eta_grid"]):
            err("critical.eta_grid", "η must be positive")
        check_n_grid("critical.n_grid", sub["n_grid"], need_fit=sub["fit"] and sub["boundary"])
        if any(t < 0 for t in sub["temperature_grid"]):
            err("critical.temperature_grid", "temperatures must be nonnegative")

    elif cfg.subcommand == "rates":
        methods = tuple(m.value for m in RateMethod)
        if sub["method"] not in methods:
            err("rates.method", f"method must be one of {', '.join(methods)}")
        check_n_grid("rates.n_grid", sub["n_grid"], need_fit=sub["fit"])

    elif cfg.subcommand == "dynamics":
        kinds = tuple(k.value for k in ScheduleKind)
        if sub["schedule"] not in kinds:
            err("dynamics.schedule", f"schedule must be one of {', '.join(kinds)}")
        if sub["rtol"] <= 0:
            err("dynamics.rtol", "rtol must be positive")
        if sub["gamma_phi"] < 0:
            err("dynamics.gamma_phi", "gamma_phi must be nonnegative")
        if sub["adiabaticity"] <= 0:
            err("dynamics.adiabaticity", "adiabaticity must be positive")
        if sub["total_time"] < 0:
            err("dynamics.total_time", "total_time must be nonnegative")
        if sub["samples"] < 0:
            err("dynamics.samples", "samples must be nonnegative")
        if sub["runtime_scaling"]:
            if not 0 < sub["target_success"] < 1:
                err("dynamics.target_success", "target_success must lie in (0, 1)")
            check_n_grid("dynamics.n_grid", sub["n_grid"], need_fit=True)
        elif sub["schedule"] == "linear" and sub["total_time"] <= 0:
            err("dynamics.total_time", "linear schedule needs total_time > 0")

    elif cfg.subcommand == "bogoliubov":
        if sub["matrix"] is None:
            err("bogoliubov.matrix", "matrix file path required")
        else:
            path = _resolve_input(cfg, sub["matrix"])
            if not path.exists():
                err("bogoliubov.matrix", f"matrix file not found: {path}")

    if cfg.fmt not in ("csv", "json"):
        err("output.format", f"format must be csv or json, got {cfg.fmt!r}")
    if cfg.output is None and cfg.subcommand != "bogoliubov":
        err("output.path", "output path required (use --output or [output] path)")
    if cfg.workers < 1:
        err("workers", "worker count must be at least 1")

    if not any(d.severity == "error" for d in diags) and cfg.subcommand in (
        "renorm",
        "critical",
        "rates",
    ):
        report = validity_check(_bath_from(merged))
        if not report.passed:
            warn(
                "bath.alpha",
                "coupling outside the weak-coupling window: "
                f"max J/E0 = {report.max_j_over_e0:.3g}, "
                f"max J(1+n)/E = {report.max_j_occ_over_e:.3g} "
                f"(threshold {report.threshold:.3g})",
            )
    return diags


def _resolve_input(cfg: RunConfig, name: str) -> Path:
    p = Path(name)
    if not p.is_absolute() and cfg.source is not None:
        return cfg.source.parent / p
    return p


def _render_diagnostic(cfg: RunConfig, d: Diagnostic) -> str:
    src = str(cfg.source) if cfg.source is not None else cfg.subcommand
    line = _anchor_line(cfg.raw, d.key)
    return f"{src}:{line}: {d.severity}: {d.key}: {d.message}"


# ---------------------------------------------------------------------------
# grid execution


def _map_grid(fn, payloads, labels, workers: int):
    """Run fn over payloads, gathering results by grid index.

    Results land at their payload's index regardless of completion order, so
    parallel and serial runs produce identical files.
    """
    if len(payloads) == 0:
        return []
    results = [None] * len(payloads)
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(payloads))) as ex:
            futures = {ex.submit(fn, p): i for i, p in enumerate(payloads)}
            try:
                for fut in as_completed(futures):
                    i = futures[fut]
                    try:
                        results[i] = fut.result()
                    except Exception as exc:
                        raise GridPointError(i, labels[i], exc) from exc
            except GridPointError:
                for fut in futures:
                    fut.cancel()
                raise
    else:
        for i, payload in enumerate(payloads):
            try:
                results[i] = fn(payload)
            except Exception as exc:
                raise GridPointError(i, labels[i], exc) from exc
    return results


def _model_point(payload):
    n, e0, s_values = payload
    inst = SearchInstance(N=n, E0=e0)
    rows = []
    for s in s_values:
        pt = two_level_params(inst, s)
        rows.append(
            {
                "N": n,
                "s": s,
                "epsilon": pt.epsilon,
                "delta": pt.delta,
                "gap": float(gap(inst, s)),
            }
        )
    return rows


def _renorm_point(payload):
    delta, bath, p, process = payload
    res = classify(delta, bath, p=p, process=Process(process))
    return {
        "alpha": bath.alpha,
        "eta": bath.eta,
        "T": bath.T,
        "delta": delta,
        "delta_tilde": res.delta_tilde,
        "regime": res.regime.value,
        "factor_single": res.factor_single,
        "factor_two": res.factor_two,
        "iterations": res.iterations,
        "converged": int(res.converged),
    }


def _critical_phase_point(payload):
    eta, temperature, n, bath, p, process = payload
    b = replace(bath, eta=eta, T=temperature)
    delta = splitting_from_size(n, b.E0)
    res = classify(delta, b, p=p, process=Process(process))
    return {
        "eta": eta,
        "T": temperature,
        "N": n,
        "alpha": b.alpha,
        "regime": res.regime.value,
        "delta_tilde": res.delta_tilde,
    }


def _critical_boundary_point(payload):
    eta, n, bath, p, process = payload
    b = replace(bath, eta=eta)
    delta = splitting_from_size(n, b.E0)
    t_star = critical_temperature(delta, b, p=p, process=Process(process))
    return {"eta": eta, "N": n, "T_star": t_star}


def _rates_point(payload):
    n, bath, method, epsilon, stimulated = payload
    delta = splitting_from_size(n, bath.E0)
    m = RateMethod(method)
    if m is RateMethod.GOLDEN_SINGLE:
        res = golden_rule_single(delta, bath, stimulated=stimulated)
    elif m is RateMethod.GOLDEN_TWO:
        res = golden_rule_two(delta, bath)
    else:
        res = incoherent_rate(delta, epsilon, bath)
    return {
        "N": n,
        "rate": res.gamma,
        "method": res.method.value,
        "window": res.window,
        "truncation_error": res.truncation_error,
    }


def _dynamics_time_point(payload):
    n, e0, kind, target, gamma_phi, rtol = payload
    inst = SearchInstance(N=n, E0=e0)
    t = time_to_target(inst, target, ScheduleKind(kind), gamma_phi=gamma_phi, rtol=rtol)
    return {"N": n, "time_to_target": t}


# ---------------------------------------------------------------------------
# subcommand runners: return ([(artifact_name, columns, rows)], manifest extras)


def _run_model(cfg, merged):
    sub = merged["model"]
    e0 = float(merged["instance"]["e0"])
    s_values = np.linspace(0.0, 1.0, int(sub["s_points"]))
    payloads = [(int(n), e0, s_values) for n in sub["n_grid"]]
    labels = [f"N={int(n)}" for n in sub["n_grid"]]
    per_n = _map_grid(_model_point, payloads, labels, cfg.workers)
    rows = [row for chunk in per_n for row in chunk]
    return [("", ["N", "s", "epsilon", "delta", "gap"], rows)], {}


def _run_renorm(cfg, merged):
    sub = merged["renorm"]
    bath = _bath_from(merged)
    payloads = [(float(d), bath, float(sub["p"]), sub["process"]) for d in sub["delta_grid"]]
    labels = [f"delta={float(d):g}" for d in sub["delta_grid"]]
    rows = _map_grid(_renorm_point, payloads, labels, cfg.workers)
    cols = [
        "alpha",
        "eta",
        "T",
        "delta",
        "delta_tilde",
        "regime",
        "factor_single",
        "factor_two",
        "iterations",
        "converged",
    ]
    return [("", cols, rows)], {}


def _run_critical(cfg, merged):
    sub = merged["critical"]
    bath = _bath_from(merged)
    p = float(sub["p"])
    process = sub["process"]

    phase_payloads = []
    phase_labels = []
    for eta in sub["eta_grid"]:
        for temperature in sub["temperature_grid"]:
            for n in sub["n_grid"]:
                phase_payloads.append(
                    (float(eta), float(temperature), int(n), bath, p, process)
                )
                phase_labels.append(f"eta={eta:g}, T={temperature:g}, N={int(n)}")
    phase_rows = _map_grid(_critical_phase_point, phase_payloads, phase_labels, cfg.workers)
    artifacts = [("", ["eta", "T", "N", "alpha", "regime", "delta_tilde"], phase_rows)]

    extras = {}
    if sub["boundary"]:
        b_payloads = []
        b_labels = []
        for eta in sub["eta_grid"]:
            for n in sub["n_grid"]:
                b_payloads.append((float(eta), int(n), bath, p, process))
                b_labels.append(f"eta={eta:g}, N={int(n)}")
        b_rows = _map_grid(_critical_boundary_point, b_payloads, b_labels, cfg.workers)
        artifacts.append(("boundary", ["eta", "N", "T_star"], b_rows))

        if sub["fit"]:
            fit_rows = []
            per_eta = len(sub["n_grid"])
            for j, eta in enumerate(sub["eta_grid"]):
                chunk = b_rows[j * per_eta : (j + 1) * per_eta]
                temps = [r["T_star"] for r in chunk]
                try:
                    f = power_law_fit(sub["n_grid"], temps)
                except ValueError as exc:
                    print(
                        f"note: no threshold fit at eta={eta:g}: {exc}", file=sys.stderr
                    )
                    continue
                fit_rows.append(
                    {
                        "eta": float(eta),
                        "exponent": f.exponent,
                        "stderr": f.stderr,
                        "r_squared": f.r_squared,
                        "prefactor": f.prefactor,
                    }
                )
            artifacts.append(
                ("fit", ["eta", "exponent", "stderr", "r_squared", "prefactor"], fit_rows)
            )
    return artifacts, extras


def _run_rates(cfg, merged):
    sub = merged["rates"]
    bath = _bath_from(merged)
    payloads = [
        (int(n), bath, sub["method"], float(sub["epsilon"]), bool(sub["stimulated"]))
        for n in sub["n_grid"]
    ]
    labels = [f"N={int(n)}" for n in sub["n_grid"]]
    rows = _map_grid(_rates_point, payloads, labels, cfg.workers)
    artifacts = [("", ["N", "rate", "method", "window", "truncation_error"], rows)]
    if sub["fit"]:
        try:
            f = power_law_fit(sub["n_grid"], [r["rate"] for r in rows])
        except ValueError as exc:
            print(f"note: no rate fit: {exc}", file=sys.stderr)
        else:
            artifacts.append(
                (
                    "fit",
                    ["method", "exponent", "stderr", "r_squared", "prefactor"],
                    [
                        {
                            "method": sub["method"],
                            "exponent": f.exponent,
                            "stderr": f.stderr,
                            "r_squared": f.r_squared,
                            "prefactor": f.prefactor,
                        }
                    ],
                )
            )
    return artifacts, {}


def _run_dynamics(cfg, merged):
    sub = merged["dynamics"]
    e0 = float(merged["instance"]["e0"])

    if sub["runtime_scaling"]:
        payloads = [
            (
                int(n),
                e0,
                sub["schedule"],
                float(sub["target_success"]),
                float(sub["gamma_phi"]),
                max(float(sub["rtol"]), 1e-8),
            )
            for n in sub["n_grid"]
        ]
        labels = [f"N={int(n)}" for n in sub["n_grid"]]
        rows = _map_grid(_dynamics_time_point, payloads, labels, cfg.workers)
        f = power_law_fit(sub["n_grid"], [r["time_to_target"] for r in rows])
        fit_rows = [
            {
                "schedule": sub["schedule"],
                "target_success": float(sub["target_success"]),
                "exponent": f.exponent,
                "stderr": f.stderr,
                "r_squared": f.r_squared,
                "prefactor": f.prefactor,
            }
        ]
        return [
            ("", ["N", "time_to_target"], rows),
            (
                "fit",
                ["schedule", "target_success", "exponent", "stderr", "r_squared", "prefactor"],
                fit_rows,
            ),
        ], {}

    inst = SearchInstance(N=int(merged["instance"]["n_sites"]), E0=e0)
    kind = ScheduleKind(sub["schedule"])
    if sub["total_time"] > 0:
        schedule = make_schedule(inst, kind, float(sub["total_time"]))
    else:
        schedule = make_local_schedule(inst, float(sub["adiabaticity"]))
    n_samples = max(int(sub["samples"]), 2)
    label = f"N={inst.N}, schedule={kind.value}"
    try:
        if sub["gamma_phi"] > 0:
            res = evolve_dephasing(
                inst,
                schedule,
                DephasingParams(float(sub["gamma_phi"])),
                rtol=float(sub["rtol"]),
                n_samples=n_samples,
            )
        else:
            res = evolve_closed(
                inst, schedule, rtol=float(sub["rtol"]), n_samples=n_samples
            )
    except Exception as exc:
        raise GridPointError(0, label, exc) from exc
    rows = [
        {
            "t": t,
            "s": float(schedule.value(t)),
            "x": x,
            "y": y,
            "z": z,
        }
        for t, x, y, z in res.trajectory
    ]
    extras = {
        "success_prob": res.success_prob,
        "total_time": res.total_time,
        "norm_drift": res.norm_drift,
        "steps": res.steps,
    }
    return [("", ["t", "s", "x", "y", "z"], rows)], extras


def _run_bogoliubov(cfg, merged):
    path = _resolve_input(cfg, merged["bogoliubov"]["matrix"])
    if path.suffix == ".npy":
        m = np.load(path)
    else:
        m = np.loadtxt(path, dtype=complex)
    m = np.atleast_2d(m)
    if m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise GridPointError(0, str(path), ValueError(f"matrix must be square 2n x 2n, got {m.shape}"))
    n = m.shape[0] // 2
    label = f"matrix={path.name}, n={n}"
    try:
        ham = QuadraticHamiltonian(n=n, m=m)
        transform = diagonalize(ham)
        res = verify_canonical(transform)
    except Exception as exc:
        raise GridPointError(0, label, exc) from exc
    for k, lam in enumerate(transform.lambdas):
        print(f"lambda_{k} = {lam:.16e}")
    print(f"para_unitarity_residual = {res.para_unitarity:.16e}")
    print(f"block_identity_residual = {res.block_identity:.16e}")
    rows = [{"mode": k, "frequency": float(lam)} for k, lam in enumerate(transform.lambdas)]
    extras = {
        "para_unitarity_residual": res.para_unitarity,
        "block_identity_residual": res.block_identity,
    }
    return [("", ["mode", "frequency"], rows)], extras


_RUNNERS = {
    "model": _run_model,
    "renorm": _run_renorm,
    "critical": _run_critical,
    "rates": _run_rates,
    "dynamics": _run_dynamics,
    "bogoliubov": _run_bogoliubov,
}


# ---------------------------------------------------------------------------
# output


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.16e" % float(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _artifact_path(output: str, name: str, fmt: str) -> Path:
    base = Path(output)
    if name == "":
        return base
    return base.with_suffix(f".{name}{base.suffix or '.' + fmt}")


def _write_artifact(path: Path, columns, rows, fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_csv_cell(row[c]) for c in columns])
    else:
        doc = {
            "columns": list(columns),
            "rows": [{c: _json_cell(row[c]) for c in columns} for row in rows],
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


def run(cfg: RunConfig) -> int:
    """Validate, execute, and write artifacts plus the manifest."""
    diags = validate(cfg)
    for d in diags:
        print(_render_diagnostic(cfg, d), file=sys.stderr)
    if any(d.severity == "error" for d in diags):
        return EXIT_CONFIG

    merged = effective_config(cfg)
    start = time.perf_counter()
    try:
        artifacts, extras = _RUNNERS[cfg.subcommand](cfg, merged)
    except GridPointError as exc:
        print(
            f"numerical failure at grid point {exc.index} ({exc.label}): {exc.cause}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    wall = time.perf_counter() - start

    written = {}
    if cfg.output is not None:
        for name, columns, rows in artifacts:
            path = _artifact_path(cfg.output, name, cfg.fmt)
            _write_artifact(path, columns, rows, cfg.fmt)
            written[name or "data"] = str(path)
        manifest = {
            "subcommand": cfg.subcommand,
            "config": merged,
            "workers": cfg.workers,
            "artifacts": written,
            "results": extras,
            "versions": {
                "openaqs": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "wall_time_s": wall,
        }
        mpath = Path(cfg.output).with_suffix(".manifest.json")
        with open(mpath, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openaqs",
        description="Batch sweeps for the dissipative adiabatic-search models.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} sweep")
        p.add_argument("--config", metavar="PATH", default=None, help="TOML config file")
        p.add_argument("--output", metavar="PATH", default=None, help="data file to write")
        p.add_argument(
            "--format", choices=("csv", "json"), default=None, help="output format"
        )
        p.add_argument(
            "--workers",
            metavar="N",
            type=int,
            default=None,
            help=f"worker processes (default: ${WORKERS_ENV} or CPU count)",
        )
        if name == "dynamics":
            p.add_argument(
                "--runtime-scaling",
                action="store_true",
                dest="runtime_scaling",
                help="sweep time-to-target over the size grid and fit the slope",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.subcommand, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

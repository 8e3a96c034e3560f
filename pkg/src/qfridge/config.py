"""Run configurations, figure presets, and deterministic output files.

Config files are flat ``key = value`` text, one entry per line, ``#`` starts a
comment. Keys are exactly the :class:`RunConfig` field names; unknown or
repeated keys are rejected.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .analysis import (
    CSV_COLUMNS,
    SOLVERS,
    SWEEP_COLUMNS,
    SWEEPABLE,
    Evolver,
    observe,
    run_timeseries,
    sweep,
    time_grid,
)
from .errors import ConfigError, SpecError
from .hilbert import MachineSpec
from .observables import max_entanglement, min_unitary_temperature, virtual_temperature

KINDS = ("timeseries", "sweep", "spectrum", "summary")
SPACINGS = ("linear", "log")
MACHINE_FIELDS = tuple(f.name for f in fields(MachineSpec))


@dataclass(frozen=True)
class RunConfig:
    label: str = "run"
    kind: str = "timeseries"
    E_C: float = 1.0
    E_H: float = 100.0
    T_C: float = 1.0
    T_R: float = 1.0
    T_H: float = 100.0
    p_C: float = 1e-5
    p_R: float = 1e-3
    p_H: float = 1e-5
    g: float = 1e-2
    t_final: float | None = None
    n_samples: int = 2001
    spacing: str = "log"
    sweep_parameter: str = "g"
    sweep_values: tuple[float, ...] = ()
    t_max: float = 500.0
    out_dir: str = "out"
    solver: str = "auto"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.spacing not in SPACINGS:
            raise ConfigError(f"spacing must be one of {SPACINGS}, got {self.spacing!r}")
        if self.sweep_parameter not in SWEEPABLE:
            raise ConfigError(f"sweep_parameter must be one of {SWEEPABLE}, got {self.sweep_parameter!r}")
        if self.kind == "sweep" and not self.sweep_values:
            raise ConfigError("a sweep needs sweep_values")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if self.t_final is not None and not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if not self.label or any(c in self.label for c in "/\\"):
            raise ConfigError(f"label must be a plain file stem, got {self.label!r}")
        try:
            self.machine()
        except SpecError as exc:
            raise ConfigError(str(exc)) from exc

    def machine(self) -> MachineSpec:
        return MachineSpec(**{name: getattr(self, name) for name in MACHINE_FIELDS})

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _convert(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    try:
        if name == "sweep_values":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if name == "t_final":
            return None if raw.lower() in ("", "auto", "none") else float(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {raw!r}") from None
    return raw


def parse_config(text: str) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(config: RunConfig) -> str:
    """Inverse of :func:`parse_config`."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        if f.name == "sweep_values":
            text = ",".join(repr(float(v)) for v in value)
        elif value is None:
            text = "auto"
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


# presets -------------------------------------------------------------------

_BASE = dict(E_C=1.0, E_H=100.0, T_C=1.0, T_R=1.0, T_H=100.0)
_FIG2 = dict(_BASE, p_C=1e-5, p_R=1e-3, p_H=1e-5)
_G_SWEEP = tuple(float(x) for x in np.logspace(-6, -1, 51))


def _fig2(name: str, g: float) -> tuple[RunConfig, ...]:
    return (RunConfig(label=name, kind="timeseries", g=g, t_final=3e6, spacing="log", **_FIG2),)


PRESETS: dict[str, tuple[RunConfig, ...]] = {
    **{f"fig2{panel}": _fig2(f"fig2{panel}", 1e-2) for panel in "aceg"},
    **{f"fig2{panel}": _fig2(f"fig2{panel}", 1e-4) for panel in "bdfh"},
    "fig3a": (
        RunConfig(label="fig3a", kind="sweep", p_C=1e-4, p_R=1e-3, p_H=1e-4, g=1e-2,
                  sweep_parameter="g", sweep_values=_G_SWEEP, t_max=500.0, **_BASE),
    ),
    "fig3b": (
        RunConfig(label="fig3b_distinct", kind="sweep", p_C=1e-4, p_R=1e-3, p_H=1e-5, g=1e-2,
                  sweep_parameter="g", sweep_values=_G_SWEEP, t_max=500.0, **_BASE),
        RunConfig(label="fig3b_equal", kind="sweep", p_C=2e-5, p_R=1e-3, p_H=2e-5, g=1e-2,
                  sweep_parameter="g", sweep_values=_G_SWEEP, t_max=500.0, **_BASE),
    ),
    "fig4a": (
        RunConfig(label="fig4a", kind="sweep", g=1e-2, sweep_parameter="g",
                  sweep_values=_G_SWEEP, t_max=500.0, **_FIG2),
    ),
    "fig4b": (
        RunConfig(label="fig4b", kind="sweep", g=1e-2, sweep_parameter="g",
                  sweep_values=_G_SWEEP, t_max=500.0, **dict(_FIG2, p_C=1e-4)),
    ),
    "fig4c": (RunConfig(label="fig4c", kind="timeseries", g=5e-3, t_final=1e6, spacing="log", **_FIG2),),
    "fig4d": (
        RunConfig(label="fig4d", kind="timeseries", g=5e-3, t_final=1e6, spacing="log",
                  **dict(_FIG2, p_C=1e-4)),
    ),
    "fig5": (
        RunConfig(label="fig5", kind="timeseries", p_C=1e-5, p_R=1e-3, p_H=1e-5, g=1e-4,
                  t_final=3e6, spacing="log", **_BASE),
    ),
}

PRESET_DESCRIPTIONS = {
    "fig2a": "distance to steady state vs time, g=1e-2",
    "fig2b": "distance to steady state vs time, g=1e-4",
    "fig2c": "cold qubit temperature vs time, g=1e-2",
    "fig2d": "cold qubit temperature vs time, g=1e-4",
    "fig2e": "R|CH witness vs time, g=1e-2",
    "fig2f": "R|CH witness vs time, g=1e-4",
    "fig2g": "genuine tripartite witness vs time, g=1e-2",
    "fig2h": "genuine tripartite witness vs time, g=1e-4",
    "fig3a": "damping rate of the coherent dynamics vs g",
    "fig3b": "asymptotic decay rate vs g, distinct and equal small couplings",
    "fig4a": "lowest cold temperature within t_max and steady state vs g",
    "fig4b": "as fig4a with p_C=1e-4",
    "fig4c": "cold qubit temperature vs time, g=5e-3",
    "fig4d": "as fig4c with p_C=1e-4",
    "fig5": "finite-time minimum of the cold qubit temperature, g=1e-4",
}


def preset(name: str) -> tuple[RunConfig, ...]:
    """Configurations behind a figure; fig3b has two series, the rest one."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; valid names: {', '.join(PRESETS)}") from None


# outputs -------------------------------------------------------------------

def _num(x):
    """Finite floats as-is, non-finite ones as null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _temperature_json(T):
    return {"value": _num(T.value), "regime": T.regime}


def summary(config: RunConfig, evolver: Evolver | None = None) -> dict:
    """Spectrum, steady-state observables and closed-form bounds for a config."""
    spec = config.machine()
    ev = evolver or Evolver(spec, config.solver)
    out: dict = {"config": dataclasses.asdict(config), "E_R": spec.E_R, "solver": ev.solver}
    out["config"]["sweep_values"] = list(config.sweep_values)
    del out["config"]["out_dir"]  # where files land must not change their bytes
    if ev.fallback_reason:
        out["fallback_reason"] = ev.fallback_reason

    if ev.spectrum is not None:
        spectrum = {
            "eigenvalues": [[_num(z.real), _num(z.imag)] for z in ev.spectrum.eigenvalues],
            "condition_number": _num(ev.spectrum.condition_number),
        }
    else:
        spectrum = {"eigenvalues": None, "condition_number": None}
    cls = ev.classification
    if cls is not None:
        spectrum.update(
            lambda_max=_num(cls.lambda_max.real),
            lambda_cp=None if cls.lambda_cp is None else [_num(cls.lambda_cp.real), _num(cls.lambda_cp.imag)],
            damping_rate=_num(cls.damping_rate),
            oscillation_angular_frequency=_num(cls.oscillation_angular_frequency),
            decay_rate=_num(cls.decay_rate),
        )
    out["spectrum"] = spectrum

    if ev.v_inf is not None:
        steady = observe(spec, [0.0], [ev.v_inf], ev.v_inf, ev.solver).record(0)
        out["steady_state"] = {
            "T_c": _num(steady.T_c), "T_r": _num(steady.T_r), "T_h": _num(steady.T_h),
            "W_R_CH": _num(steady.W_R_CH), "W_genuine": _num(steady.W_genuine),
            "populations": [_num(p) for p in steady.populations],
            "im_rho36": _num(steady.im_rho36),
        }
    else:
        out["steady_state"] = None

    try:
        T_V, cools = virtual_temperature(spec)
        out["virtual_temperature"] = dict(_temperature_json(T_V), cools=cools)
    except SpecError as exc:
        out["virtual_temperature"] = {"error": str(exc)}
    out["max_entanglement"] = {
        "R|CH": _num(max_entanglement(spec, "R|CH")),
        "genuine": _num(max_entanglement(spec, "genuine")),
    }
    if spec.g > 0:
        T_min, t_opt = min_unitary_temperature(spec)
        out["min_unitary_temperature"] = dict(_temperature_json(T_min), t_opt=_num(t_opt))
    else:
        out["min_unitary_temperature"] = None
    return out


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render(config: RunConfig) -> dict[str, str]:
    """File name -> contents for one config, computed fully before any write."""
    spec = config.machine()
    ev = Evolver(spec, config.solver)
    files = {}
    if config.kind == "timeseries":
        t_final = config.t_final
        if t_final is None:
            if ev.classification is None:
                raise ConfigError("t_final=auto needs a decay rate; set t_final explicitly")
            t_final = 30.0 / ev.classification.decay_rate
        series = run_timeseries(spec, times=time_grid(t_final, config.n_samples, config.spacing), evolver=ev)
        cols = series.columns()
        files[f"{config.label}.csv"] = _csv(CSV_COLUMNS, zip(*(cols[c] for c in CSV_COLUMNS)))
    elif config.kind == "sweep":
        result = sweep(spec, config.sweep_parameter, config.sweep_values, t_max=config.t_max,
                       solver=config.solver)
        rows = [[getattr(r, c) for c in SWEEP_COLUMNS] for r in result.rows]
        files[f"{config.label}.csv"] = _csv(SWEEP_COLUMNS, rows)
    elif config.kind == "spectrum" and ev.spectrum is not None:
        rows = [[j, z.real, z.imag] for j, z in enumerate(ev.spectrum.eigenvalues)]
        files[f"{config.label}.csv"] = _csv(("index", "re", "im"), [[str(r[0]), r[1], r[2]] for r in rows])
    files[f"{config.label}.json"] = dumps_json(summary(config, ev))
    return files


def write_files(out_dir, files: dict[str, str]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        target = out / name
        fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append(target)
    return written


def run(config: RunConfig) -> list[Path]:
    return write_files(config.out_dir, render(config))

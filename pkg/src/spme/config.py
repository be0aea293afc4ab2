"""Run configuration files and built-in presets.

Text grammar (one statement per line)::

    # comment
    [section]            -> prefixes following keys with "section."
    key = value          -> key may itself be dotted, e.g. grid.n_cells = 800

A value is read as a JSON literal when it parses as one (numbers, true/false,
"strings", [lists]); anything else is kept as a bare string, so recipes can
be written unquoted: ``initial.total = box(0, 0.2, 5)``.

Recognised keys::

    name, m
    grid.geometry (interval | radial), grid.dim, grid.x_min, grid.x_max, grid.n_cells
    initial.total, initial.split
    time.start, time.end
    snapshots.times              explicit list
    snapshots.count, snapshots.spacing (linear | log)   evenly spaced over [start, end]
    snapshots.dense              [t_a, t_b, count] dense window
    solver.cfl_safety, solver.boundary_guard, solver.face_average
    asymptotics.decades, asymptotics.factor

A file whose first non-blank character is ``{`` is read as JSON with the same
keys, nested or dotted.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid
from .initial import InitialData
from .solver import RunConfig


class ConfigError(ValueError):
    pass


_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w.]*)\s*\]$")
_ASSIGN = re.compile(r"^([A-Za-z_][\w.]*)\s*=\s*(.*)$")

KNOWN_KEYS = {
    "name", "m",
    "grid.geometry", "grid.dim", "grid.x_min", "grid.x_max", "grid.n_cells",
    "initial.total", "initial.split",
    "time.start", "time.end",
    "snapshots.times", "snapshots.count", "snapshots.spacing", "snapshots.dense",
    "solver.cfl_safety", "solver.boundary_guard", "solver.face_average",
    "asymptotics.decades", "asymptotics.factor",
}


def _value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_text(text: str) -> dict:
    out = {}
    prefix = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sec = _SECTION.match(line)
        if sec:
            prefix = sec.group(1) + "."
            continue
        kv = _ASSIGN.match(line)
        if not kv:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = prefix + kv.group(1)
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _value(kv.group(2))
    return out


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = prefix + k
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse(text: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            return _flatten(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
    return parse_text(text)


@dataclass
class Experiment:
    """A run configuration plus the settings used by the asymptotics command."""

    run: RunConfig
    decades: int = 3
    factor: float = 10.0
    raw: dict = None


def _snapshot_times(d: dict, t0: float, t1: float) -> list:
    times = [float(t) for t in d.get("snapshots.times", [])]
    if "snapshots.count" in d:
        count = int(d["snapshots.count"])
        spacing = d.get("snapshots.spacing", "linear")
        if spacing == "linear":
            times += list(np.linspace(t0, t1, count))
        elif spacing == "log":
            if t0 <= 0:
                raise ConfigError("log-spaced snapshots need time.start > 0")
            times += list(np.geomspace(t0, t1, count))
        else:
            raise ConfigError(f"unknown snapshots.spacing {spacing!r}")
    if "snapshots.dense" in d:
        try:
            ta, tb, count = d["snapshots.dense"]
        except (TypeError, ValueError) as exc:
            raise ConfigError("snapshots.dense must be [t_a, t_b, count]") from exc
        times += list(np.linspace(float(ta), float(tb), int(count)))
    # endpoints of generated ranges should hit the run limits exactly
    times = [min(max(t, t0), t1) for t in times]
    return sorted(set(times))


def build(d: dict) -> Experiment:
    unknown = set(d) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        grid = Grid(
            x_min=float(d.get("grid.x_min", 0.0)),
            x_max=float(d["grid.x_max"]),
            n_cells=int(d["grid.n_cells"]),
            geometry=str(d.get("grid.geometry", "interval")),
            dim=int(d.get("grid.dim", 1)),
        )
        t0 = float(d.get("time.start", 0.0))
        t1 = float(d["time.end"])
        cfg = RunConfig(
            m=float(d["m"]),
            grid=grid,
            initial_data=InitialData(str(d["initial.total"]), str(d.get("initial.split", "fraction(1)"))),
            t_start=t0,
            t_end=t1,
            snapshot_times=_snapshot_times(d, t0, t1),
            cfl_safety=float(d.get("solver.cfl_safety", 0.4)),
            boundary_guard=float(d.get("solver.boundary_guard", 0.9)),
            face_average=str(d.get("solver.face_average", "arithmetic")),
            name=str(d.get("name", "run")),
        )
        cfg.initial_fields()
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return Experiment(cfg, int(d.get("asymptotics.decades", 3)), float(d.get("asymptotics.factor", 10.0)), d)


PRESETS = {
    # k = 1 started on the exact profile B_1(., 1)
    "pme-exact": {
        "name": "pme-exact", "m": 2,
        "grid.x_min": -6, "grid.x_max": 6, "grid.n_cells": 800,
        "initial.total": "barenblatt(1, 1)", "initial.split": "fraction(1)",
        "time.start": 1.0, "time.end": 2.0,
        "snapshots.times": [1.0, 1.25, 1.5, 1.75, 2.0],
    },
    # narrow box split into a left and a right species
    "two-species-split": {
        "name": "two-species-split", "m": 2,
        "grid.x_min": -10, "grid.x_max": 10, "grid.n_cells": 400,
        "initial.total": "box(0, 0.2, 5)", "initial.split": "left-right",
        "time.start": 0.1, "time.end": 50.0,
        "snapshots.count": 12, "snapshots.spacing": "log",
    },
    # a Barenblatt profile younger than the clock, split left/right: t^a1 max U decays to c*
    "smoothing": {
        "name": "smoothing", "m": 2,
        "grid.x_min": -10, "grid.x_max": 10, "grid.n_cells": 400,
        "initial.total": "barenblatt(1, 0.05)", "initial.split": "left-right",
        "time.start": 0.1, "time.end": 50.0,
        "snapshots.count": 12, "snapshots.spacing": "log",
    },
    # one decade of the left/right split; the asymptotics command repeats it with rescaling
    "asymptotics": {
        "name": "asymptotics", "m": 2,
        "grid.x_min": -3, "grid.x_max": 3, "grid.n_cells": 400,
        "initial.total": "box(0, 0.8, 1.25)", "initial.split": "left-right",
        "time.start": 0.1, "time.end": 1.0,
        "snapshots.count": 6, "snapshots.spacing": "log",
        "asymptotics.decades": 3, "asymptotics.factor": 10,
    },
    # radially symmetric 2-D problem, three species in rings
    "radial-interleave": {
        "name": "radial-interleave", "m": 2,
        "grid.geometry": "radial", "grid.dim": 2,
        "grid.x_min": 0, "grid.x_max": 5, "grid.n_cells": 250,
        "initial.total": "bump(0, 1.6, 1)", "initial.split": "interleave(5, 3)",
        "time.start": 0.05, "time.end": 10.0,
        "snapshots.count": 8, "snapshots.spacing": "log",
    },
}


def load(source: str) -> Experiment:
    """Build an experiment from a preset name or a config file path."""
    if source in PRESETS:
        return build(dict(PRESETS[source]))
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    return build(parse(text))


def dump_text(d: dict) -> str:
    """Render a flat config dict in the text grammar."""
    lines = []
    for k, v in d.items():
        lines.append(f"{k} = {json.dumps(v)}")
    return "\n".join(lines) + "\n"

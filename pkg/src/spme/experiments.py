"""Running configured experiments and writing their outputs.

Output layout of a run directory::

    manifest.json      resolved config, derived constants, masses, step summary
    snapshots.json     grid centres and every stored species field
    diagnostics.csv    one row per snapshot (columns from DiagnosticsSeries)
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import barenblatt, diagnostics
from .config import Experiment
from .grid import SpeciesState, mass, support_interval
from .solver import FACE_AVERAGES, RunConfig, Trajectory, run

FLOAT_FORMAT = "{:.17g}"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return FLOAT_FORMAT.format(float(x))


def derived_constants(cfg: RunConfig) -> dict:
    c = barenblatt.constants(cfg.m, cfg.grid.dim)
    fields = cfg.initial_fields()
    M = float(sum(mass(cfg.grid, f) for f in fields))
    out = c.as_dict()
    out["M"] = M
    out["C_M"] = c.C(M) if M > 0 else 0.0
    out["c_sharp"] = c.c_sharp
    out["concavity_limit"] = c.concavity_limit
    return out


def write_csv(path: Path, columns: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[col]) for col in columns])


def read_csv(path) -> dict:
    """Columns of a CSV written by :func:`write_csv`, as float arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader if row]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def _write_json(path: Path, obj) -> None:
    # json writes floats with repr, the shortest string that reads back exactly
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, allow_nan=True)
        fh.write("\n")


@dataclass
class RunOutput:
    trajectory: Optional[Trajectory]
    series: Optional[diagnostics.DiagnosticsSeries]
    manifest: dict
    out_dir: Path


def manifest_for(cfg: RunConfig, traj: Optional[Trajectory] = None, wall: float = 0.0) -> dict:
    man = {
        "config": cfg.as_dict(),
        "constants": derived_constants(cfg),
        "initial_species_masses": [float(x) for x in
                                   (SpeciesState(cfg.t_start, cfg.initial_fields()).species_masses(cfg.grid))],
    }
    if traj is not None:
        man["steps"] = traj.dt_summary()
        man["final_species_masses"] = [float(x) for x in traj.final.species_masses(cfg.grid)]
        man["snapshot_times"] = [float(t) for t in traj.times]
        man["wall_seconds"] = wall
    else:
        man["steps"] = {"steps": 0}
        man["snapshot_times"] = []
    return man


def run_experiment(exp: Experiment, out_dir, workers: Optional[int] = None) -> RunOutput:
    """Run ``exp`` and write manifest, snapshots and diagnostics into ``out_dir``.

    With no snapshot times requested only the manifest is written.
    """
    cfg = exp.run
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not cfg.snapshot_times:
        man = manifest_for(cfg)
        _write_json(out / "manifest.json", man)
        return RunOutput(None, None, man, out)

    t0 = time.perf_counter()
    traj = run(cfg, workers=workers)
    wall = time.perf_counter() - t0
    g = cfg.grid
    c = barenblatt.constants(cfg.m, g.dim)
    ser = diagnostics.series(traj.snapshots, g, c)

    man = manifest_for(cfg, traj, wall)
    _write_json(out / "manifest.json", man)
    _write_json(out / "snapshots.json", {
        "centers": g.centers.tolist(),
        "snapshots": [{"t": s.t, "fields": s.fields.tolist()} for s in traj.snapshots],
    })
    write_csv(out / "diagnostics.csv", ser.columns(), ser.rows)
    return RunOutput(traj, ser, man, out)


# asymptotics ----------------------------------------------------------------

@dataclass
class DecadeRecord:
    decade: int
    t: float
    steps: int
    l1: np.ndarray
    linf: np.ndarray
    scaled_linf: np.ndarray
    concavity: np.ndarray
    mass_drift: float

    def row(self) -> dict:
        r = {"decade": self.decade, "t": self.t, "steps": self.steps, "mass_drift": self.mass_drift}
        for i in range(len(self.l1)):
            j = i + 1
            r[f"l1_dist_species_{j}"] = self.l1[i]
            r[f"linf_dist_species_{j}"] = self.linf[i]
            r[f"scaled_linf_species_{j}"] = self.scaled_linf[i]
            r[f"concavity_median_species_{j}"] = self.concavity[i]
        return r


@dataclass
class AsymptoticsReport:
    k_species: int
    concavity_target: float
    records: list = field(default_factory=list)

    def columns(self) -> list:
        cols = ["decade", "t", "steps", "mass_drift"]
        for j in range(1, self.k_species + 1):
            cols += [f"l1_dist_species_{j}", f"linf_dist_species_{j}",
                     f"scaled_linf_species_{j}", f"concavity_median_species_{j}"]
        return cols

    def rows(self) -> list:
        return [r.row() for r in self.records]

    def table(self) -> str:
        cols = self.columns()
        lines = [",".join(cols)]
        for r in self.rows():
            lines.append(",".join(fmt(r[c]) for c in cols))
        return "\n".join(lines)


def asymptotics(exp: Experiment, decades: Optional[int] = None, factor: Optional[float] = None,
                workers: Optional[int] = None, on_decade=None) -> AsymptoticsReport:
    """Follow the run over ``decades`` horizons t_0 * factor**d on a fixed grid.

    Each horizon integrates from t_0 to factor * t_0 and is then zoomed back by
    the self-similar rescaling with lambda = factor, so the support stays
    resolved. Per-species masses are renormalized after each zoom to remove
    the interpolation error. L1 and t^a1 * Linf distances are invariant under
    the zoom, so they are reported as physical values; Linf is converted back
    with the physical time.
    """
    decades = exp.decades if decades is None else int(decades)
    factor = exp.factor if factor is None else float(factor)
    if decades < 2:
        raise ValueError("asymptotics needs at least two decades")
    if not factor > 1:
        raise ValueError("factor must exceed 1")
    cfg = exp.run
    g = cfg.grid
    t0 = cfg.t_start
    if not t0 > 0:
        raise ValueError("asymptotics needs time.start > 0")
    c = barenblatt.constants(cfg.m, g.dim)
    state = SpeciesState(t0, cfg.initial_fields())
    Mi = state.species_masses(g)
    M = float(Mi.sum())
    report = AsymptoticsReport(state.k_species, c.concavity_limit)
    for d in range(1, decades + 1):
        leg = RunConfig(cfg.m, g, state.fields, t0, factor * t0, [factor * t0], cfg.cfl_safety,
                        cfg.boundary_guard, cfg.face_average, f"{cfg.name}-decade{d}")
        traj = run(leg, workers=workers)
        fin = traj.final
        dist = diagnostics.barenblatt_distance(fin, g, c, Mi, M)
        conc = np.array([
            diagnostics.pressure_concavity_probe(fin.fields[i], g, cfg.m, fin.t, Mi[i] / M).median
            for i in range(fin.k_species)
        ])
        t_phys = t0 * factor ** d
        rec = DecadeRecord(
            decade=d, t=t_phys, steps=traj.step_count,
            l1=dist.l1, linf=dist.scaled_linf / t_phys ** c.a1, scaled_linf=dist.scaled_linf,
            concavity=conc,
            mass_drift=float(np.max(np.abs(fin.species_masses(g) - Mi) / Mi)),
        )
        report.records.append(rec)
        if on_decade is not None:
            on_decade(rec)
        state = diagnostics.rescale_state(fin, g, c, factor, keep_masses=Mi)
    return report


def write_asymptotics(exp: Experiment, report: AsymptoticsReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = manifest_for(exp.run)
    man["asymptotics"] = {"decades": len(report.records), "factor": exp.factor,
                          "concavity_target": report.concavity_target}
    _write_json(out / "manifest.json", man)
    path = out / "asymptotics.csv"
    write_csv(path, report.columns(), report.rows())
    return path


# bench ------------------------------------------------------------------------

def bench(exp: Experiment, steps: int = 2000, workers: Optional[int] = None) -> list:
    """Time ``steps`` steps of ``exp`` with each face-averaging rule.

    Reports wall time per step, the simulated time reached and the support
    width, which shows how far each rule lets the front travel.
    """
    cfg = exp.run
    out = []
    for avg in FACE_AVERAGES:
        leg = RunConfig(cfg.m, cfg.grid, cfg.initial_data, cfg.t_start, cfg.t_end,
                        (), cfg.cfl_safety, cfg.boundary_guard, avg, f"{cfg.name}-{avg}")
        count = [0]
        last = [None]

        class _Stop(Exception):
            pass

        def on_step(i, s):
            count[0] = i
            last[0] = s
            if i >= steps:
                raise _Stop

        t_start = time.perf_counter()
        try:
            run(leg, workers=workers, on_step=on_step)
        except _Stop:
            pass
        wall = time.perf_counter() - t_start
        s = last[0]
        rng = support_interval(cfg.grid, s.total) if s is not None else range(0)
        out.append({
            "face_average": avg,
            "steps": count[0],
            "seconds_per_step": wall / max(count[0], 1),
            "t_reached": s.t if s is not None else cfg.t_start,
            "support_cells": len(rng),
        })
    return out

"""Explicit conservative finite-volume integration of the coupled system

    u^i_t = div(m U^(m-1) grad u^i),   U = sum_i u^i,

with zero-flux boundaries and CFL-limited time steps.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import initial
from .grid import Grid, SpeciesState

log = logging.getLogger(__name__)

FACE_AVERAGES = ("arithmetic", "mean_of_powers", "harmonic")


class SolverError(RuntimeError):
    pass


class BoundaryHitError(SolverError):
    """The support came too close to the domain edge; zero-flux walls would matter."""


class InstabilityError(SolverError):
    """A non-finite or negative value appeared."""


class CFLViolationError(AssertionError):
    pass


@dataclass
class RunConfig:
    m: float
    grid: Grid
    initial_data: "initial.InitialData | np.ndarray"
    t_start: float
    t_end: float
    snapshot_times: Sequence[float] = ()
    cfl_safety: float = 0.4
    boundary_guard: float = 0.9
    face_average: str = "arithmetic"
    name: str = "run"

    def __post_init__(self):
        if not self.m > 1:
            raise ValueError("m must exceed 1")
        if self.t_start < 0 or self.t_end < self.t_start:
            raise ValueError("need 0 <= t_start <= t_end")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not 0 < self.boundary_guard < 1:
            raise ValueError("boundary_guard must lie in (0, 1)")
        if self.face_average not in FACE_AVERAGES:
            raise ValueError(f"face_average must be one of {FACE_AVERAGES}")
        times = sorted(float(t) for t in self.snapshot_times)
        if times and (times[0] < self.t_start or times[-1] > self.t_end):
            raise ValueError("snapshot times must lie in [t_start, t_end]")
        self.snapshot_times = times

    def initial_fields(self) -> np.ndarray:
        if isinstance(self.initial_data, initial.InitialData):
            return initial.build(self.initial_data, self.grid, self.m)
        fields = np.array(self.initial_data, dtype=float, ndmin=2)
        if fields.shape[1] != self.grid.n_cells:
            raise ValueError("initial fields do not match the grid")
        return fields

    @property
    def k_species(self) -> int:
        return self.initial_fields().shape[0]

    def as_dict(self) -> dict:
        init = self.initial_data
        return {
            "name": self.name,
            "m": self.m,
            "grid": self.grid.as_dict(),
            "initial_data": init.as_dict() if isinstance(init, initial.InitialData) else "explicit",
            "t_start": self.t_start,
            "t_end": self.t_end,
            "snapshot_times": list(self.snapshot_times),
            "cfl_safety": self.cfl_safety,
            "boundary_guard": self.boundary_guard,
            "face_average": self.face_average,
        }


@dataclass
class Trajectory:
    config: RunConfig
    snapshots: list
    step_count: int
    dts: np.ndarray = field(repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> SpeciesState:
        return self.snapshots[-1]

    def dt_summary(self) -> dict:
        if self.dts.size == 0:
            return {"steps": 0}
        return {
            "steps": int(self.dts.size),
            "dt_min": float(self.dts.min()),
            "dt_max": float(self.dts.max()),
            "dt_mean": float(self.dts.mean()),
        }


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("SPME_THREADS", "1")))
    except ValueError:
        return 1


def face_coefficient(U_left, U_right, m: float, average: str = "arithmetic"):
    """Diffusion coefficient m U^(m-1) at a face between two cells."""
    U_left = np.asarray(U_left, dtype=float)
    U_right = np.asarray(U_right, dtype=float)
    if average == "arithmetic":
        out = m * (0.5 * (U_left + U_right)) ** (m - 1.0)
    elif average == "mean_of_powers":
        out = 0.5 * m * (U_left ** (m - 1.0) + U_right ** (m - 1.0))
    elif average == "harmonic":
        a = m * U_left ** (m - 1.0)
        b = m * U_right ** (m - 1.0)
        s = a + b
        out = np.divide(2.0 * a * b, s, out=np.zeros(np.broadcast(a, b).shape), where=s > 0)
    else:
        raise ValueError(f"unknown face average {average!r}")
    return out if out.ndim else float(out)


def _coefficients(total: np.ndarray, m: float, average: str) -> np.ndarray:
    return face_coefficient(total[:-1], total[1:], m, average)


def _stable_dt(g: Grid, cmax: float) -> float:
    return g.dx * g.dx / (2.0 * g.d_eff * cmax)


def cfl_dt(state: SpeciesState, g: Grid, m: float, cfl_safety: float = 0.4,
           remaining: float = math.inf, average: str = "arithmetic") -> float:
    """Largest stable step times ``cfl_safety``; ``remaining`` when nothing diffuses."""
    c = _coefficients(state.total, m, average)
    cmax = float(c.max()) if c.size else 0.0
    if cmax == 0.0:
        return remaining
    return cfl_safety * _stable_dt(g, cmax)


def _update_block(u, c, g: Grid, dt: float, lo: int, hi: int, out) -> None:
    # cells lo..hi-1; face f separates cells f-1 and f, boundary faces 0 and N carry no flux
    n = g.n_cells
    f0, f1 = max(lo, 1), min(hi, n - 1)
    flux = np.zeros((u.shape[0], hi - lo + 1))
    if f1 >= f0:
        coef = g.face_areas[f0:f1 + 1] * c[f0 - 1:f1]
        flux[:, f0 - lo:f1 - lo + 1] = coef * (u[:, f0:f1 + 1] - u[:, f0 - 1:f1]) / g.dx
    out[:, lo:hi] = u[:, lo:hi] + (dt / g.weights[lo:hi]) * (flux[:, 1:] - flux[:, :-1])


def _blocks(n: int, workers: int) -> list:
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def step(state: SpeciesState, g: Grid, m: float, dt: float, *, average: str = "arithmetic",
         workers: int = 1, pool: Optional[ThreadPoolExecutor] = None) -> SpeciesState:
    """Advance every species by one explicit Euler step of length ``dt``.

    Face coefficients come from the current total. Work may be split over
    ``workers`` contiguous cell blocks; the per-cell arithmetic is the same
    for any split, so the result does not depend on the worker count.
    """
    c = _coefficients(state.total, m, average)
    cmax = float(c.max()) if c.size else 0.0
    if cmax > 0.0 and dt > _stable_dt(g, cmax):
        raise CFLViolationError(f"dt={dt:.6g} exceeds the stability bound {_stable_dt(g, cmax):.6g}")
    u = state.fields
    out = np.empty_like(u)
    blocks = _blocks(g.n_cells, max(1, workers))
    if len(blocks) == 1 or (pool is None and workers <= 1):
        for lo, hi in blocks:
            _update_block(u, c, g, dt, lo, hi, out)
    elif pool is not None:
        list(pool.map(lambda b: _update_block(u, c, g, dt, b[0], b[1], out), blocks))
    else:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(lambda b: _update_block(u, c, g, dt, b[0], b[1], out), blocks))
    return SpeciesState(state.t + dt, out)


def _guard_zone(g: Grid, guard: float) -> np.ndarray:
    return g.distance_from_center() >= guard * g.half_width


def run(config: RunConfig, *, workers: Optional[int] = None,
        dt_sequence: Optional[Sequence[float]] = None,
        on_step: Optional[Callable[[int, SpeciesState], None]] = None) -> Trajectory:
    """Integrate from ``t_start`` to ``t_end``.

    The first snapshot is always the initial state; further snapshots are
    taken at every requested time, onto which the step size is clipped.
    ``dt_sequence`` replays a recorded list of step sizes instead of the CFL
    choice (used to compare runs step for step).
    """
    g = config.grid
    m = config.m
    workers = default_workers() if workers is None else workers
    fields = config.initial_fields()
    if np.any(fields < 0) or not np.all(np.isfinite(fields)):
        raise ValueError("initial data must be finite and nonnegative")
    state = SpeciesState(config.t_start, fields)
    zone = _guard_zone(g, config.boundary_guard)
    if np.any(state.total[zone] > 0):
        raise BoundaryHitError("initial support already reaches the boundary guard zone")

    targets = [t for t in config.snapshot_times if t > config.t_start]
    snapshots = [state]
    dts = []
    t_end = config.t_end
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    replay = iter(dt_sequence) if dt_sequence is not None else None
    try:
        ti = 0
        while state.t < t_end:
            stop = min(targets[ti], t_end) if ti < len(targets) else t_end
            if replay is not None:
                dt = next(replay, None)
                if dt is None:
                    raise ValueError("dt_sequence exhausted before t_end")
            else:
                dt = cfl_dt(state, g, m, config.cfl_safety, remaining=t_end - state.t,
                            average=config.face_average)
                dt = min(dt, stop - state.t)
            new = step(state, g, m, dt, average=config.face_average, workers=workers, pool=pool)
            if abs(new.t - stop) <= 1e-12 * max(1.0, abs(stop)):
                new.t = stop
            state = new
            dts.append(dt)
            if not np.all(np.isfinite(state.total)):
                raise InstabilityError(f"non-finite value at t={state.t:.6g}")
            if np.any(state.fields < 0):
                raise InstabilityError(f"negative density at t={state.t:.6g}")
            if np.any(state.total[zone] > 0):
                raise BoundaryHitError(
                    f"support reached {config.boundary_guard:g} of the half-width at t={state.t:.6g}")
            if on_step is not None:
                on_step(len(dts), state)
            while ti < len(targets) and state.t >= targets[ti]:
                snapshots.append(state)
                ti += 1
    finally:
        if pool is not None:
            pool.shutdown()
    log.debug("%s: %d steps to t=%g", config.name, len(dts), state.t)
    return Trajectory(config=config, snapshots=snapshots, step_count=len(dts), dts=np.array(dts))

"""Independent reference computations for tests.

The reference kernel is a plain scalar loop (numba-compiled) that scatters each
face flux into both neighbouring cells. It deliberately shares no flux code
with :mod:`spme.solver`.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import integrate

from . import initial
from .barenblatt import sphere_surface
from .grid import Grid, SpeciesState, mass
from .solver import RunConfig, Trajectory, run


class QuadratureError(RuntimeError):
    pass


@numba.njit(cache=True)
def _max_coeff(U, m):
    best = 0.0
    for f in range(1, U.shape[0]):
        cf = m * (0.5 * (U[f - 1] + U[f])) ** (m - 1.0)
        if cf > best:
            best = cf
    return best


@numba.njit(cache=True)
def _advance(u, m, dx, dt, area, vol):
    k, n = u.shape
    U = np.zeros(n)
    for s in range(k):
        for j in range(n):
            U[j] += u[s, j]
    new = np.empty_like(u)
    acc = np.zeros(n)
    for s in range(k):
        for j in range(n):
            acc[j] = 0.0
        for f in range(1, n):
            cf = m * (0.5 * (U[f - 1] + U[f])) ** (m - 1.0)
            flux = area[f] * cf * (u[s, f] - u[s, f - 1]) / dx
            acc[f - 1] += flux
            acc[f] -= flux
        for j in range(n):
            new[s, j] = u[s, j] + dt * acc[j] / vol[j]
    return new


def _refined_initial(config: RunConfig, fine: Grid, factor: int) -> np.ndarray:
    if isinstance(config.initial_data, initial.InitialData):
        return initial.build(config.initial_data, fine, config.m)
    coarse = np.array(config.initial_data, dtype=float, ndmin=2)
    return np.repeat(coarse, factor, axis=1)


def reference_run(config: RunConfig, refinement: int = 4) -> Trajectory:
    """Integrate ``config`` on a grid ``refinement`` times finer (1 keeps the resolution)."""
    if refinement not in (1, 2, 4, 8):
        raise ValueError("refinement must be 1, 2, 4 or 8")
    if config.face_average != "arithmetic":
        raise ValueError("the reference kernel only implements the arithmetic face average")
    g = config.grid
    fine = Grid(g.x_min, g.x_max, g.n_cells * refinement, g.geometry, g.dim)
    u0 = _refined_initial(config, fine, refinement).astype(float)
    u = u0
    m = float(config.m)
    dx = fine.dx
    # face areas and cell volumes written out independently of Grid
    edges = fine.x_min + dx * np.arange(fine.n_cells + 1)
    if fine.radial:
        d = fine.dim
        area = edges ** (d - 1)
        vol = np.diff(edges ** d) / d
    else:
        area = np.ones(fine.n_cells + 1)
        vol = np.full(fine.n_cells, dx)
    deff = fine.dim if fine.radial else 1

    t = float(config.t_start)
    pending = [s for s in config.snapshot_times if s > t]
    snaps = [SpeciesState(t, u)]
    dts = []
    while t < config.t_end:
        stop = pending[0] if pending else config.t_end
        cmax = _max_coeff(u.sum(axis=0), m)
        dt = stop - t if cmax == 0.0 else min(config.cfl_safety * dx * dx / (2.0 * deff * cmax), stop - t)
        u = _advance(u, m, dx, dt, area, vol)
        t = stop if dt == stop - t else t + dt
        dts.append(dt)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"reference run blew up at t={t}")
        while pending and t >= pending[0]:
            snaps.append(SpeciesState(t, u))
            pending.pop(0)
    ref_config = RunConfig(config.m, fine, u0, config.t_start,
                           config.t_end, config.snapshot_times, config.cfl_safety,
                           config.boundary_guard, config.face_average, config.name + "-reference")
    return Trajectory(ref_config, snaps, len(dts), np.array(dts))


def restrict(fine_field: np.ndarray, factor: int) -> np.ndarray:
    """Values of a fine field at the coarse cell centres (mean of the two middle subcells)."""
    f = np.asarray(fine_field).reshape(-1, factor)
    if factor == 1:
        return f[:, 0]
    h = factor // 2
    return 0.5 * (f[:, h - 1] + f[:, h])


def quadrature_mass(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
                    breaks: Sequence[float] = (), radial_dim: int | None = None,
                    max_subdivisions: int = 500) -> float:
    """Adaptive quadrature of ``f`` over [a, b], split at ``breaks`` (e.g. a support edge).

    With ``radial_dim`` the integrand is taken as a radial profile in that
    many dimensions and weighted by the sphere surface times r**(dim-1).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if radial_dim is not None:
        d = radial_dim
        integrand = lambda r: f(r) * r ** (d - 1)
        scale = sphere_surface(d)
    else:
        integrand, scale = f, 1.0
    pts = [a] + sorted(p for p in breaks if a < p < b) + [b]
    total, err = 0.0, 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        # scipy warns when it gives up; the error estimate check below reports it instead
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(integrand, lo, hi, epsabs=tol / len(pts), epsrel=0.0,
                                    limit=max_subdivisions)
        total += val
        err += e
    if not err * scale <= tol:
        raise QuadratureError(f"error estimate {err * scale:.3g} exceeds tolerance {tol:.3g}")
    return total * scale


def self_convergence(config: RunConfig, factor: int = 4) -> dict:
    """L1 gap between the main solver at h and the reference at h / factor, at h and h / 2.

    Returns the two gaps, their ratio and the observed order.
    """
    gaps = []
    for scale in (1, 2):
        g = config.grid
        cg = Grid(g.x_min, g.x_max, g.n_cells * scale, g.geometry, g.dim)
        cfg = RunConfig(config.m, cg, config.initial_data, config.t_start, config.t_end,
                        config.snapshot_times, config.cfl_safety, config.boundary_guard,
                        config.face_average, config.name)
        main = run(cfg)
        ref = reference_run(cfg, factor)
        coarse = restrict(ref.final.total, factor)
        gaps.append(mass(cg, np.abs(main.final.total - coarse)))
    ratio = gaps[0] / gaps[1]
    return {"gap_h": gaps[0], "gap_h2": gaps[1], "ratio": ratio, "order": math.log2(ratio)}

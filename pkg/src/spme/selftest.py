"""Desk-scale acceptance suite.

Each check returns a :class:`CheckResult`; :func:`run_all` prints one
pass/fail line per check. Preset runs are shared between checks through a
:class:`Suite` cache, so the whole table takes well under a minute.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import barenblatt, config, diagnostics, experiments, oracle
from .grid import Grid, SpeciesState
from .solver import RunConfig, Trajectory, run


@dataclass
class CheckResult:
    key: int
    name: str
    claim: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.key:2d} {self.name:<22s} {self.detail} ({self.seconds:.1f}s)"


@dataclass
class PresetRecord:
    """A preset run plus per-step observations gathered along the way."""

    traj: Trajectory
    masses0: np.ndarray
    max_drift: float
    ordering_violations: int
    mismatch_sides: list = field(default_factory=list)
    scaled_max: list = field(default_factory=list)


class Suite:
    def __init__(self, workers: Optional[int] = 1):
        self.workers = workers
        self._presets = {}
        self._asym = None

    def preset(self, name: str) -> PresetRecord:
        if name not in self._presets:
            exp = config.load(name)
            cfg = exp.run
            g = cfg.grid
            c = barenblatt.constants(cfg.m, g.dim)
            m0 = SpeciesState(cfg.t_start, cfg.initial_fields()).species_masses(g)
            drift = [0.0]
            bad = [0]
            sides, smax = [], []

            def on_step(i, s):
                rel = np.abs(s.species_masses(g) - m0) / np.where(m0 > 0, m0, 1.0)
                drift[0] = max(drift[0], float(rel.max()))
                bad[0] += int(np.count_nonzero((s.fields < 0) | (s.fields > s.total)))
                sides.append((i, s.t, int(diagnostics.support_mismatch_sides(s, g).max())))
                smax.append((s.t, s.t ** c.a1 * float(s.total.max())))

            traj = run(cfg, workers=self.workers, on_step=on_step)
            self._presets[name] = PresetRecord(traj, m0, drift[0], bad[0], sides, smax)
        return self._presets[name]

    def asymptotics(self) -> experiments.AsymptoticsReport:
        if self._asym is None:
            self._asym = experiments.asymptotics(config.load("asymptotics"), decades=3,
                                                 workers=self.workers)
        return self._asym


# checks -----------------------------------------------------------------------

def check_barenblatt(suite: Suite) -> tuple:
    worst_mass = 0.0
    for (m, n), M in zip(itertools.product((1.5, 2.0, 3.0), (1, 2, 3)),
                         itertools.cycle((0.5, 1.0, 3.0))):
        c = barenblatt.constants(m, n)
        t = 0.7
        rho = barenblatt.support_radius(c, M, t)
        prof = lambda r: barenblatt.radial_profile(c, M, r, t)
        if n == 1:
            q = oracle.quadrature_mass(prof, -rho, rho, tol=1e-12, breaks=(0.0,))
        else:
            q = oracle.quadrature_mass(prof, 0.0, rho, tol=1e-12, radial_dim=n)
        worst_mass = max(worst_mass, abs(q - M) / M)

    # identity on the same nine (m, n) pairs, sampled across the support and
    # just inside the front
    worst_scale, worst_where = 0.0, ""
    for m, n in itertools.product((1.5, 2.0, 3.0), (1, 2, 3)):
        c = barenblatt.constants(m, n)
        for t in (0.1, 1.0, 10.0):
            rho = barenblatt.support_radius(c, 1.0, t)
            r = np.concatenate([np.linspace(0.0, 1.5 * rho, 2001), rho * (1.0 - np.logspace(-12, -3, 10))])
            base = barenblatt.radial_profile(c, 1.0, r, t)
            for lam in (0.5, 2.0, 10.0):
                other = lam ** c.a1 * barenblatt.radial_profile(c, 1.0, lam ** c.a2 * r, lam * t)
                gap = float(np.max(np.abs(other - base)))
                if gap > worst_scale:
                    worst_scale, worst_where = gap, f"m={m:g} n={n} t={t:g} lambda={lam:g}"
    ok = worst_mass <= 1e-10 and worst_scale <= 1e-12
    return ok, (f"max rel mass err {worst_mass:.3g} (<=1e-10), max self-similar gap {worst_scale:.3g} "
                f"at {worst_where} (<=1e-12)")


def _exact_error(cfg: RunConfig, workers) -> float:
    traj = run(cfg, workers=workers)
    c = barenblatt.constants(cfg.m, cfg.grid.dim)
    M = traj.snapshots[0].total_mass(cfg.grid)
    return diagnostics.total_distance(traj.final, cfg.grid, c, M), M


def check_exact(suite: Suite) -> tuple:
    cfg = config.load("pme-exact").run
    err, M = _exact_error(cfg, suite.workers)
    g = cfg.grid
    fine = RunConfig(cfg.m, Grid(g.x_min, g.x_max, 2 * g.n_cells), cfg.initial_data,
                     cfg.t_start, cfg.t_end, cfg.snapshot_times)
    err2, _ = _exact_error(fine, suite.workers)
    ratio = err / err2
    order = math.log2(ratio)
    coarse = RunConfig(cfg.m, Grid(g.x_min, g.x_max, 200), cfg.initial_data, cfg.t_start, cfg.t_end)
    sc = oracle.self_convergence(coarse, factor=4)
    ok = err <= 0.02 * M and ratio >= 1.5 and order >= 0.8 and sc["ratio"] >= 1.5 and sc["order"] >= 0.8
    return ok, (f"L1 err {err:.3g} (<= {0.02 * M:.3g}); 800->1600 ratio {ratio:.3g} order {order:.3g}; "
                f"vs reference ratio {sc['ratio']:.3g} order {sc['order']:.3g}")


def check_conservation(suite: Suite) -> tuple:
    parts, ok = [], True
    for name in config.PRESETS:
        rec = suite.preset(name)
        good = rec.max_drift <= 1e-10 and rec.traj.step_count >= 10_000
        ok &= good
        parts.append(f"{name}: drift {rec.max_drift:.2g} over {rec.traj.step_count} steps")
    return ok, "; ".join(parts)


def check_ordering(suite: Suite) -> tuple:
    total_bad, n_snaps = 0, 0
    for name in config.PRESETS:
        rec = suite.preset(name)
        for s in rec.traj.snapshots:
            total_bad += int(np.count_nonzero((s.fields < 0) | (s.fields > s.total)))
            n_snaps += 1
        total_bad += rec.ordering_violations
    return total_bad == 0, f"{total_bad} violations over {n_snaps} snapshots and every step"


def check_sum_is_pme(suite: Suite) -> tuple:
    cfg = config.load("two-species-split").run
    multi = run(cfg, workers=1)
    summed = multi.snapshots[0].total.copy()
    single_cfg = RunConfig(cfg.m, cfg.grid, summed[None, :], cfg.t_start, cfg.t_end,
                           cfg.snapshot_times, cfg.cfl_safety, cfg.boundary_guard,
                           cfg.face_average, cfg.name + "-summed")
    single = run(single_cfg, workers=1, dt_sequence=multi.dts)
    diff_cells, worst = 0, 0.0
    for a, b in zip(multi.snapshots, single.snapshots):
        d = np.abs(a.total - b.total)
        diff_cells += int(np.count_nonzero(d))
        worst = max(worst, float(d.max()))
    ok = diff_cells == 0 and len(multi.snapshots) == len(single.snapshots)
    return ok, f"{diff_cells} cells differ bitwise across {len(multi.snapshots)} snapshots, max |diff| {worst:.3g}"


def check_support(suite: Suite) -> tuple:
    rec = suite.preset("two-species-split")
    after = [m for i, _, m in rec.mismatch_sides if i >= 10]
    worst = max(after) if after else 0
    first = [m for i, _, m in rec.mismatch_sides if i < 10]
    return worst <= 1, (f"max per-side mismatch {worst} cells over {len(after)} steps after step 10 "
                        f"(first steps: {max(first) if first else 0})")


def _strictly_decreasing(v) -> bool:
    v = np.asarray(v)
    return bool(np.all(np.diff(v) < 0))


def check_asymptotics(suite: Suite) -> tuple:
    rep = suite.asymptotics()
    l1 = np.array([r.l1 for r in rep.records])
    sl = np.array([r.scaled_linf for r in rep.records])
    ok = all(_strictly_decreasing(l1[:, i]) and _strictly_decreasing(sl[:, i]) for i in range(rep.k_species))
    ratio = sl[-1] / sl[0]
    ok = ok and bool(np.all(ratio <= 0.3))
    return ok, ("L1 " + " > ".join(f"{x:.3g}" for x in l1[:, 0]) + "; t^a1 Linf "
                + " > ".join(f"{x:.3g}" for x in sl[:, 0]) + f"; final/first {ratio.max():.3g} (<=0.3)")


def check_concavity(suite: Suite) -> tuple:
    rep = suite.asymptotics()
    med = rep.records[-1].concavity
    rel = np.abs(med - rep.concavity_target) / abs(rep.concavity_target)
    ok = bool(np.all(rel <= 0.10))
    return ok, "medians " + ", ".join(f"{x:.4g}" for x in med) + f" vs {rep.concavity_target:.4g}, max rel {rel.max():.3g}"


def check_intersection(suite: Suite) -> tuple:
    worst = 0.0
    for m, n in ((2.0, 1), (3.0, 1), (2.0, 2)):
        c = barenblatt.constants(m, n)
        for t in (0.5, 1.0, 10.0, 100.0):
            r = barenblatt.intersection_ratio(c, 1.0, t, 0.01 * t)
            worst = max(worst, abs(r - c.c_sharp))
    c = barenblatt.constants(2.0, 1)
    r = barenblatt.intersection_ratio(c, 1.0, 1.0, 0.01)
    return worst <= 0.02, f"m=2 n=1 ratio {r:.6f} vs {c.c_sharp:.6f}; max gap {worst:.3g} (<=0.02)"


def check_smoothing(suite: Suite) -> tuple:
    name = "smoothing"
    rec = suite.preset(name)
    cfg = rec.traj.config
    c = barenblatt.constants(cfg.m, cfg.grid.dim)
    M = float(rec.masses0.sum())
    bound = 1.2 * c.C(M) ** (1.0 / (cfg.m - 1.0))
    v = np.array([s for t, s in rec.scaled_max if t >= 2.0 * cfg.t_start])
    rises = int(np.count_nonzero(np.diff(v) > 0))
    ok = rises == 0 and float(v.max()) <= bound
    return ok, f"{rises} increases over {v.size} steps; max {v.max():.5g} <= {bound:.5g}"


def dense_pme_config() -> RunConfig:
    d = dict(config.PRESETS["pme-exact"])
    d.pop("snapshots.times")
    d["snapshots.dense"] = [1.0, 2.0, 201]
    return config.build(d).run


def check_oscillation(suite: Suite) -> tuple:
    cfg = dense_pme_config()
    traj = run(cfg, workers=suite.workers)
    times = traj.times
    fields = np.array([s.total for s in traj.snapshots])
    rep = diagnostics.oscillation_probe(times, fields, cfg.grid, (0.5, 2.0), 0.1, levels=4, m=cfg.m)
    nonincreasing = bool(np.all(np.diff(rep.osc) <= 0))
    ok = nonincreasing and rep.exponent_defined and rep.exponent > 0 and bool(np.all(rep.sigma_hat < 1))
    return ok, ("osc " + ", ".join(f"{x:.3g}" for x in rep.osc) + f"; exponent {rep.exponent:.3g}; "
                "max sigma " + f"{rep.sigma_hat.max():.3g}")


CHECKS = [
    (1, "barenblatt-exactness", "profile carries mass M and is invariant under the self-similar zoom", check_barenblatt),
    (2, "scheme-vs-exact", "single-species run tracks the exact profile and converges under refinement", check_exact),
    (3, "conservation", "every species mass is conserved", check_conservation),
    (4, "ordering", "0 <= u_i <= U everywhere", check_ordering),
    (5, "sum-solves-pme", "the species total evolves exactly as a single-species run", check_sum_is_pme),
    (6, "support-equality", "each species fills the support of the total", check_support),
    (7, "asymptotic-decay", "each species approaches its share of the Barenblatt profile", check_asymptotics),
    (8, "eventual-concavity", "species pressures approach the Barenblatt curvature", check_concavity),
    (9, "intersection-ratio", "nearby Barenblatt profiles cross at c_sharp times the radius", check_intersection),
    (10, "smoothing-bound", "t^a1 max U decays and stays below 1.2 C_M^(1/(m-1))", check_smoothing),
    (11, "oscillation-decay", "oscillation shrinks over nested intrinsic cylinders", check_oscillation),
]


def run_check(key: int, suite: Suite) -> CheckResult:
    _, name, claim, fn = next(c for c in CHECKS if c[0] == key)
    t0 = time.perf_counter()
    try:
        ok, detail = fn(suite)
    except Exception as exc:  # a crash is a failure of that check, not of the table
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CheckResult(key, name, claim, bool(ok), detail, time.perf_counter() - t0)


def run_all(keys=None, suite: Optional[Suite] = None,
            emit: Callable[[str], None] = print) -> list:
    suite = suite or Suite()
    results = []
    for key, *_ in CHECKS:
        if keys and key not in keys:
            continue
        res = run_check(key, suite)
        emit(res.line())
        results.append(res)
    passed = sum(r.passed for r in results)
    emit(f"{passed}/{len(results)} checks passed")
    return results

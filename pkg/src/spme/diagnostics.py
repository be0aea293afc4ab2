"""Measurements on simulated states: distances to Barenblatt profiles, support
comparison, pressure concavity, self-similar rescaling and the intrinsic
cylinder oscillation probe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import barenblatt
from .barenblatt import SelfSimilarConstants
from .grid import Grid, SpeciesState, mass, support_interval


def _radius(g: Grid) -> np.ndarray:
    return g.centers if g.radial else np.abs(g.centers)


def _weighted_sum(g: Grid, values: np.ndarray) -> float:
    return float(np.sum(g.weights * values)) * g.measure_factor


@dataclass
class Distance:
    l1: np.ndarray
    linf: np.ndarray
    scaled_linf: np.ndarray


def barenblatt_distance(state: SpeciesState, g: Grid, c: SelfSimilarConstants,
                        species_masses: Optional[Sequence[float]] = None,
                        M: Optional[float] = None) -> Distance:
    """Distances from each species to (M_i / M) B_M(., t).

    Masses default to the ones carried by ``state``.
    """
    t = state.t
    if not t > 0:
        raise ValueError("distances to the Barenblatt profile need t > 0")
    if species_masses is None:
        species_masses = state.species_masses(g)
    species_masses = np.asarray(species_masses, dtype=float)
    if M is None:
        M = float(species_masses.sum())
    profile = np.asarray(barenblatt.radial_profile(c, M, _radius(g), t))
    l1, linf = [], []
    for u, Mi in zip(state.fields, species_masses):
        diff = np.abs(u - (Mi / M) * profile)
        l1.append(_weighted_sum(g, diff))
        linf.append(float(diff.max()))
    linf = np.array(linf)
    return Distance(np.array(l1), linf, t ** c.a1 * linf)


def total_distance(state: SpeciesState, g: Grid, c: SelfSimilarConstants, M: float) -> float:
    """L1 distance of the total field to B_M(., t)."""
    profile = np.asarray(barenblatt.radial_profile(c, M, _radius(g), state.t))
    return _weighted_sum(g, np.abs(state.total - profile))


def support_mismatch(state: SpeciesState, g: Grid, threshold: float = 0.0) -> np.ndarray:
    """Per species: cells in the total's support range where total > threshold >= species."""
    rng = support_interval(g, state.total, threshold)
    if not len(rng):
        return np.zeros(state.k_species, dtype=int)
    sl = slice(rng.start, rng.stop)
    hot = state.total[sl] > threshold
    return np.array([int(np.count_nonzero(hot & (u[sl] <= threshold))) for u in state.fields])


def support_mismatch_sides(state: SpeciesState, g: Grid, threshold: float = 0.0) -> np.ndarray:
    """Mismatch counts split at the middle of the total's support; shape (k, 2)."""
    rng = support_interval(g, state.total, threshold)
    out = np.zeros((state.k_species, 2), dtype=int)
    if not len(rng):
        return out
    mid = rng.start + len(rng) // 2
    hot = state.total > threshold
    for i, u in enumerate(state.fields):
        bad = hot & (u <= threshold)
        out[i, 0] = np.count_nonzero(bad[rng.start:mid])
        out[i, 1] = np.count_nonzero(bad[mid:rng.stop])
    return out


@dataclass
class Concavity:
    median: float
    max_deviation: float
    target: float
    n_points: int

    @property
    def relative_error(self) -> float:
        return abs(self.median - self.target) / abs(self.target)


def pressure_concavity_probe(field, g: Grid, m: float, t: float, mass_fraction: float = 1.0,
                             trim: float = 0.2) -> Concavity:
    """Median of t * v_xx over the interior of the support.

    The pressure is v = m/(m-1) * (u / mass_fraction)**(m-1); for a Barenblatt
    profile t * v_xx is then exactly -1/((m-1) n + 2) for every m, and passing
    the species mass fraction M_i / M lets a species be compared with the
    same constant.
    """
    u = np.asarray(field, dtype=float)
    rng = support_interval(g, u)
    if len(rng) < 5:
        raise ValueError(f"support spans {len(rng)} cells; the probe needs at least 5")
    cut = int(math.ceil(trim * len(rng)))
    lo = max(rng.start + cut, 1)
    hi = min(rng.stop - cut, g.n_cells - 1)
    if hi <= lo:
        raise ValueError("no interior cells left after trimming")
    v = m / (m - 1.0) * (u / mass_fraction) ** (m - 1.0)
    j = np.arange(lo, hi)
    d2 = t * (v[j - 1] - 2.0 * v[j] + v[j + 1]) / (g.dx * g.dx)
    target = -1.0 / ((m - 1.0) * g.dim + 2.0)
    return Concavity(float(np.median(d2)), float(np.max(np.abs(d2 - target))), target, int(j.size))


def rescale(field, g: Grid, c: SelfSimilarConstants, lam: float) -> np.ndarray:
    """Sample lam**a1 * u(lam**a2 * x) at the cell centres by linear interpolation.

    Applied to a field at time t the result represents time t / lam. Sample
    points beyond the outermost centres read zero, which is only allowed when
    the source vanishes in the corresponding edge cell.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    u = np.asarray(field, dtype=float)
    x = g.centers
    xs = lam ** c.a2 * (x - g.center) + g.center
    below, above = xs < x[0], xs > x[-1]
    if g.radial:
        below[:] = False  # values near r = 0 extend evenly
    if (np.any(below) and u[0] != 0) or (np.any(above) and u[-1] != 0):
        raise ValueError("rescaling samples outside the data range where the field is nonzero")
    out = np.interp(xs, x, u, left=u[0] if g.radial else 0.0, right=0.0)
    return lam ** c.a1 * out


def rescale_state(state: SpeciesState, g: Grid, c: SelfSimilarConstants, lam: float,
                  keep_masses: Optional[Sequence[float]] = None) -> SpeciesState:
    """Rescale every species; optionally renormalize each to ``keep_masses``."""
    fields = np.array([rescale(u, g, c, lam) for u in state.fields])
    if keep_masses is not None:
        for i, Mi in enumerate(keep_masses):
            cur = mass(g, fields[i])
            if cur > 0:
                fields[i] *= Mi / cur
    return SpeciesState(state.t / lam, fields)


@dataclass
class OscillationReport:
    center: tuple
    radii: np.ndarray
    heights: np.ndarray
    omega: float
    theta0: float
    alpha0: float
    beta: float
    osc: np.ndarray
    sigma_hat: np.ndarray
    exponent: float
    residual: float
    exponent_defined: bool = True
    samples: list = field(default_factory=list)


def _osc(times, fields, x, x0, t0, R, h):
    tm = (times <= t0 + 1e-12 * max(1.0, abs(t0))) & (times >= t0 - h - 1e-12 * max(1.0, abs(t0)))
    xm = np.abs(x - x0) <= R
    block = fields[np.ix_(tm, xm)]
    if block.size == 0:
        return 0.0, 0, 0
    return float(block.max() - block.min()), int(tm.sum()), int(xm.sum())


def oscillation_probe(times, fields, g: Grid, center: tuple, R0: float, levels: int = 4,
                      m: float = 2.0, beta: float = 1.0) -> OscillationReport:
    """Oscillation over nested intrinsic cylinders B_R(x0) x (t0 - (4/omega)**a0 R^2, t0].

    ``fields`` holds sampled values of one density, shape (len(times), n_cells).
    omega is the oscillation over the outermost cylinder; since that cylinder's
    height depends on omega, the self-consistent value is located by bisection
    (the oscillation can only shrink as omega grows). The radii halve at each
    level and the exponent is the least-squares slope of log osc against log R.
    """
    times = np.asarray(times, dtype=float)
    fields = np.asarray(fields, dtype=float)
    x0, t0 = center
    x = g.centers
    alpha0 = beta * (m - 1.0)
    span = t0 - times.min()

    def height(omega, R):
        return (4.0 / omega) ** alpha0 * R * R

    def g_of(omega):
        return _osc(times, fields, x, x0, t0, R0, min(height(omega, R0), span))[0]

    hi = _osc(times, fields, x, x0, t0, R0, span)[0]
    radii = R0 * 0.5 ** np.arange(levels)
    if hi == 0.0:
        return OscillationReport((x0, t0), radii, np.full(levels, np.inf), 0.0, 0.0, alpha0, beta,
                                 np.zeros(levels), np.full(levels - 1, np.nan), math.nan,
                                 math.nan, exponent_defined=False)
    too_tall = "the outer intrinsic cylinder is taller than the sampled time range"
    if alpha0 > 0:
        # omega at which the outer cylinder exactly spans the sampled times
        lo = 4.0 * (R0 * R0 / span) ** (1.0 / alpha0)
        if lo >= hi or g_of(lo) <= lo:
            raise ValueError(too_tall)
        while hi - lo > 1e-13 * hi:
            mid = 0.5 * (lo + hi)
            if g_of(mid) > mid:
                lo = mid
            else:
                hi = mid
    else:
        hi = g_of(hi)
    omega = hi
    heights = np.array([height(omega, R) for R in radii])
    if heights[0] > span * (1 + 1e-12):
        raise ValueError(too_tall)
    osc, samples = [], []
    for R, h in zip(radii, heights):
        val, nt, nx = _osc(times, fields, x, x0, t0, R, h)
        osc.append(val)
        samples.append((nt, nx))
    if samples[-1][0] < 2:
        raise ValueError("the smallest cylinder holds fewer than two time samples")
    osc = np.array(osc)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_hat = osc[1:] / osc[:-1]
    if np.all(osc > 0):
        A = np.vstack([np.log(radii), np.ones(levels)]).T
        coef, *_ = np.linalg.lstsq(A, np.log(osc), rcond=None)
        resid = np.log(osc) - A @ coef
        exponent, residual, defined = float(coef[0]), float(np.sqrt(np.mean(resid ** 2))), True
    else:
        exponent, residual, defined = math.nan, math.nan, False
    return OscillationReport((x0, t0), radii, heights, omega, omega / 4.0, alpha0, beta, osc,
                             sigma_hat, exponent, residual, defined, samples)


@dataclass
class DiagnosticsSeries:
    """One row of measurements per snapshot."""

    k_species: int
    rows: list = field(default_factory=list)

    def columns(self) -> list:
        cols = ["t", "mass_total", "scaled_max_total", "l1_err_vs_exact", "support_lo", "support_hi"]
        for i in range(1, self.k_species + 1):
            cols += [f"mass_species_{i}", f"l1_dist_species_{i}", f"linf_dist_species_{i}",
                     f"scaled_linf_species_{i}", f"support_mismatch_species_{i}",
                     f"concavity_median_species_{i}"]
        return cols

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)


def measure(state: SpeciesState, g: Grid, c: SelfSimilarConstants,
            species_masses: Sequence[float], threshold: float = 0.0) -> dict:
    """All per-snapshot diagnostics as a flat dict (see DiagnosticsSeries.columns)."""
    species_masses = np.asarray(species_masses, dtype=float)
    M = float(species_masses.sum())
    masses = state.species_masses(g)
    rng = support_interval(g, state.total, threshold)
    row = {
        "t": state.t,
        "mass_total": state.total_mass(g),
        "scaled_max_total": state.t ** c.a1 * float(state.total.max()),
        "support_lo": g.centers[rng.start] if len(rng) else math.nan,
        "support_hi": g.centers[rng.stop - 1] if len(rng) else math.nan,
    }
    if state.t > 0:
        row["l1_err_vs_exact"] = total_distance(state, g, c, M)
        dist = barenblatt_distance(state, g, c, species_masses, M)
    else:
        row["l1_err_vs_exact"] = math.nan
        dist = None
    mism = support_mismatch(state, g, threshold)
    for i in range(state.k_species):
        j = i + 1
        row[f"mass_species_{j}"] = masses[i]
        row[f"l1_dist_species_{j}"] = dist.l1[i] if dist else math.nan
        row[f"linf_dist_species_{j}"] = dist.linf[i] if dist else math.nan
        row[f"scaled_linf_species_{j}"] = dist.scaled_linf[i] if dist else math.nan
        row[f"support_mismatch_species_{j}"] = int(mism[i])
        try:
            conc = pressure_concavity_probe(state.fields[i], g, c.m, state.t,
                                            mass_fraction=species_masses[i] / M)
            row[f"concavity_median_species_{j}"] = conc.median
        except ValueError:
            row[f"concavity_median_species_{j}"] = math.nan
    return row


def series(snapshots: Sequence[SpeciesState], g: Grid, c: SelfSimilarConstants,
           species_masses: Optional[Sequence[float]] = None) -> DiagnosticsSeries:
    if species_masses is None:
        species_masses = snapshots[0].species_masses(g)
    out = DiagnosticsSeries(k_species=snapshots[0].k_species)
    for s in snapshots:
        out.rows.append(measure(s, g, c, species_masses))
    return out

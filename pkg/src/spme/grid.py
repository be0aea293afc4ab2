"""Uniform cell grids (1-D interval or radially symmetric n-D) and species storage."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .barenblatt import sphere_surface

INTERVAL = "interval"
RADIAL = "radial"


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [x_min, x_max] into ``n_cells`` cells.

    With ``geometry="radial"`` the coordinate is the radius of an
    ``dim``-dimensional radially symmetric problem and ``x_min`` must be 0.
    """

    x_min: float
    x_max: float
    n_cells: int
    geometry: str = INTERVAL
    dim: int = 1

    def __post_init__(self):
        if self.geometry not in (INTERVAL, RADIAL):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.geometry == INTERVAL and self.dim != 1:
            raise ValueError("interval geometry is one-dimensional")
        if self.geometry == RADIAL:
            if self.x_min != 0:
                raise ValueError("radial grids start at r = 0")
            if self.dim < 1:
                raise ValueError("dim must be positive")

    @property
    def radial(self) -> bool:
        return self.geometry == RADIAL

    @cached_property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @cached_property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    @cached_property
    def weights(self) -> np.ndarray:
        """Cell volumes: dx, or the exact integral of s**(dim-1) over each radial cell."""
        if not self.radial:
            return np.full(self.n_cells, self.dx)
        f = self.faces
        d = self.dim
        return (f[1:] ** d - f[:-1] ** d) / d

    @cached_property
    def face_areas(self) -> np.ndarray:
        """Area factor of every face (length n_cells + 1)."""
        if not self.radial:
            return np.ones(self.n_cells + 1)
        return self.faces ** (self.dim - 1)

    @cached_property
    def measure_factor(self) -> float:
        """Factor turning sum(w * f) into the full n-D integral."""
        return sphere_surface(self.dim) if self.radial else 1.0

    @property
    def d_eff(self) -> int:
        return self.dim if self.radial else 1

    @property
    def center(self) -> float:
        return 0.0 if self.radial else 0.5 * (self.x_min + self.x_max)

    @property
    def half_width(self) -> float:
        return self.x_max if self.radial else 0.5 * (self.x_max - self.x_min)

    def distance_from_center(self) -> np.ndarray:
        return np.abs(self.centers - self.center)

    def as_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "dim": self.dim,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "n_cells": self.n_cells,
        }


def mass(g: Grid, field) -> float:
    field = np.asarray(field, dtype=float)
    if field.shape != (g.n_cells,):
        raise ValueError(f"field has shape {field.shape}, grid has {g.n_cells} cells")
    return float(np.sum(g.weights * field)) * g.measure_factor


def support_interval(g: Grid, field, threshold: float = 0.0) -> range:
    """Smallest contiguous cell range holding every value above ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    idx = np.flatnonzero(np.asarray(field) > threshold)
    if idx.size == 0:
        return range(0)
    return range(int(idx[0]), int(idx[-1]) + 1)


def species_sum(fields: np.ndarray) -> np.ndarray:
    """Sum of species rows, accumulated left to right."""
    total = fields[0].copy()
    for row in fields[1:]:
        total += row
    return total


class SpeciesState:
    """Time stamp, per-species cell averages and their total.

    ``fields`` has shape (k_species, n_cells). The total is only ever set
    through :meth:`update`, which recomputes it as the species sum.
    """

    __slots__ = ("t", "_fields", "_total")

    def __init__(self, t: float, fields):
        fields = np.array(fields, dtype=float, ndmin=2)
        if fields.ndim != 2:
            raise ValueError("fields must be a (k_species, n_cells) array")
        self.t = float(t)
        self._fields = fields
        self._total = species_sum(fields)
        self._fields.flags.writeable = False
        self._total.flags.writeable = False

    @property
    def fields(self) -> np.ndarray:
        return self._fields

    @property
    def total(self) -> np.ndarray:
        return self._total

    @property
    def k_species(self) -> int:
        return self._fields.shape[0]

    @property
    def n_cells(self) -> int:
        return self._fields.shape[1]

    def update(self, t: float, fields) -> None:
        fields = np.array(fields, dtype=float, ndmin=2)
        if fields.shape != self._fields.shape:
            raise ValueError(f"expected shape {self._fields.shape}, got {fields.shape}")
        self.t = float(t)
        self._fields = fields
        self._total = species_sum(fields)
        self._fields.flags.writeable = False
        self._total.flags.writeable = False

    def copy(self) -> "SpeciesState":
        return SpeciesState(self.t, self._fields)

    def species_masses(self, g: Grid) -> np.ndarray:
        return np.array([mass(g, f) for f in self._fields])

    def total_mass(self, g: Grid) -> float:
        return mass(g, self._total)

    def __repr__(self) -> str:
        return f"SpeciesState(t={self.t!r}, k_species={self.k_species}, n_cells={self.n_cells})"

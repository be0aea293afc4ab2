"""Initial-data recipes: a total density profile plus a rule splitting it into species.

Recipes are written as call-like strings, e.g. ``"box(0, 0.8, 1.25)"`` or
``"fraction(0.25, 0.75)"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import barenblatt
from .grid import Grid, mass

_CALL = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*(?:\((.*)\))?\s*$")


class RecipeError(ValueError):
    pass


def parse_recipe(text: str) -> tuple[str, list[float]]:
    """Split ``"name(a, b, ...)"`` into the name and its float arguments."""
    match = _CALL.match(text)
    if not match:
        raise RecipeError(f"cannot parse recipe {text!r}")
    name, args = match.group(1), match.group(2)
    values = []
    if args is not None and args.strip():
        try:
            values = [float(a) for a in args.split(",")]
        except ValueError as exc:
            raise RecipeError(f"non-numeric argument in {text!r}") from exc
    return name, values


@dataclass(frozen=True)
class InitialData:
    total: str
    split: str = "fraction(1)"

    def as_dict(self) -> dict:
        return {"total": self.total, "split": self.split}


def total_profile(recipe: str, g: Grid, m: float) -> np.ndarray:
    name, args = parse_recipe(recipe)
    x = g.centers
    if name == "barenblatt":
        if len(args) != 2:
            raise RecipeError("barenblatt(M, t_offset) takes two arguments")
        M, t_off = args
        c = barenblatt.constants(m, g.dim)
        return np.asarray(barenblatt.radial_profile(c, M, np.abs(x), t_off), dtype=float)
    if name == "box":
        if len(args) != 3:
            raise RecipeError("box(center, width, height) takes three arguments")
        center, width, height = args
        return np.where(np.abs(x - center) <= 0.5 * width, height, 0.0)
    if name == "bump":
        if len(args) != 3:
            raise RecipeError("bump(center, width, mass) takes three arguments")
        center, width, target = args
        s = (x - center) / (0.5 * width)
        f = np.maximum(1.0 - s * s, 0.0) ** 2
        total = mass(g, f)
        if total == 0:
            raise RecipeError(f"bump {recipe!r} covers no cell centre")
        return f * (target / total)
    raise RecipeError(f"unknown profile recipe {name!r}")


def split_profile(recipe: str, total: np.ndarray, g: Grid) -> np.ndarray:
    """Distribute ``total`` over species; returns a (k, n_cells) array."""
    name, args = parse_recipe(recipe)
    if name == "fraction":
        if not args or any(f < 0 for f in args):
            raise RecipeError("fraction(f_1, ..., f_k) needs nonnegative fractions")
        return np.array([f * total for f in args])
    if name == "left-right":
        if args:
            raise RecipeError("left-right takes no arguments")
        idx = np.flatnonzero(total > 0)
        if idx.size == 0:
            raise RecipeError("left-right split of an empty profile")
        mid = 0.5 * (g.centers[idx[0]] + g.centers[idx[-1]])
        left = g.centers < mid
        return np.array([np.where(left, total, 0.0), np.where(left, 0.0, total)])
    if name == "interleave":
        if len(args) not in (1, 2):
            raise RecipeError("interleave(period[, k]) takes one or two arguments")
        period = int(args[0])
        k = int(args[1]) if len(args) == 2 else 2
        if period < 1 or k < 1:
            raise RecipeError("interleave period and species count must be positive")
        owner = (np.arange(g.n_cells) // period) % k
        return np.array([np.where(owner == i, total, 0.0) for i in range(k)])
    raise RecipeError(f"unknown split recipe {name!r}")


def build(data: InitialData, g: Grid, m: float) -> np.ndarray:
    return split_profile(data.split, total_profile(data.total, g, m), g)

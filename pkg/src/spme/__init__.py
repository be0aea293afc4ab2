"""Simulation and analytic reference tools for the coupled porous-medium system

    u^i_t = div(m U^(m-1) grad u^i),   U = u^1 + ... + u^k.
"""

from .barenblatt import SelfSimilarConstants, constants
from .grid import Grid, SpeciesState, mass
from .solver import RunConfig, Trajectory, run

__all__ = ["SelfSimilarConstants", "constants", "Grid", "SpeciesState", "mass",
           "RunConfig", "Trajectory", "run"]
__version__ = "0.1.0"

"""Barenblatt self-similar solutions of the porous medium equation.

The profile of mass ``M`` is

    B_M(x, t) = t**-a1 * (C_M - kappa_B |x|**2 / t**(2 a2))_+ ** (1/(m-1))

with ``C_M = (c_star * M**a3)**(m-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special


class NoCrossingError(ValueError):
    """Raised when two time-shifted profiles show no sign change on the support."""


@dataclass(frozen=True)
class SelfSimilarConstants:
    m: float
    n: int
    a1: float
    a2: float
    a3: float
    kappa_B: float
    c_star: float

    def C(self, M: float) -> float:
        """Profile height constant C_M for total mass M."""
        return (self.c_star * M ** self.a3) ** (self.m - 1.0)

    @property
    def c_sharp(self) -> float:
        """Limit of the crossing ratio of B(t) and B(t + tau) as tau -> 0."""
        return math.sqrt((self.m - 1.0) * self.a1)

    @property
    def concavity_limit(self) -> float:
        """Limit of t * d^2/dx_i^2 of the pressure m/(m-1) u^(m-1)."""
        return -1.0 / ((self.m - 1.0) * self.n + 2.0)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "a1": self.a1,
            "a2": self.a2,
            "a3": self.a3,
            "kappa_B": self.kappa_B,
            "c_star": self.c_star,
        }


def _check_mn(m: float, n: int) -> None:
    if not m > 1.0:
        raise ValueError(f"exponent m must exceed 1 (got {m!r}); fast diffusion is not supported")
    if int(n) != n or n < 1:
        raise ValueError(f"dimension n must be a positive integer (got {n!r})")


def sphere_surface(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _unit_ball_integral(m: float, n: int, method: str) -> float:
    # integral over R^n of (1 - |z|^2)_+^(1/(m-1))
    p = 1.0 / (m - 1.0)
    if method == "gamma":
        return math.exp(
            0.5 * n * math.log(math.pi)
            + special.gammaln(p + 1.0)
            - special.gammaln(p + 1.0 + 0.5 * n)
        )
    if method == "quadrature":
        val, _ = integrate.quad(
            lambda r: (1.0 - r * r) ** p * r ** (n - 1), 0.0, 1.0,
            epsabs=0.0, epsrel=1e-13, limit=200,
        )
        return sphere_surface(n) * val
    raise ValueError(f"unknown method {method!r}")


def solve_c_star(m: float, n: int, method: str = "gamma") -> float:
    """Normalization constant c* making the profile carry mass exactly M.

    Substituting y = x / t**a2 removes the time dependence of the mass and
    gives M = C_M**(1/(m-1) + n/2) * kappa_B**(-n/2) * I(m, n), where I is the
    unit-ball integral. Solving for c* yields
    c* = (kappa_B**(n/2) / I)**(2 a2).

    ``method`` selects how I is computed: ``"gamma"`` (Beta-function closed
    form) or ``"quadrature"`` (adaptive quadrature).
    """
    _check_mn(m, n)
    a1 = n / ((m - 1.0) * n + 2.0)
    a2 = a1 / n
    kappa = a1 * (m - 1.0) / (2.0 * m * n)
    ball = _unit_ball_integral(m, n, method)
    return (kappa ** (0.5 * n) / ball) ** (2.0 * a2)


def constants(m: float, n: int) -> SelfSimilarConstants:
    _check_mn(m, n)
    n = int(n)
    a1 = n / ((m - 1.0) * n + 2.0)
    return SelfSimilarConstants(
        m=float(m),
        n=n,
        a1=a1,
        a2=a1 / n,
        a3=2.0 * a1 / n,
        kappa_B=a1 * (m - 1.0) / (2.0 * m * n),
        c_star=solve_c_star(m, n),
    )


def _check_t(t: float) -> None:
    if not t > 0:
        raise ValueError(f"time must be positive (got {t!r})")


def radial_profile(c: SelfSimilarConstants, M: float, r, t: float):
    """B_M as a function of the radius |x|."""
    _check_t(t)
    r = np.asarray(r, dtype=float)
    base = c.C(M) - c.kappa_B * r * r / t ** (2.0 * c.a2)
    out = t ** -c.a1 * np.maximum(base, 0.0) ** (1.0 / (c.m - 1.0))
    return out if out.ndim else float(out)


def profile_value(c: SelfSimilarConstants, M: float, x, t: float):
    """Evaluate B_M(x, t).

    For ``n == 1`` ``x`` holds scalar positions; otherwise the last axis of
    ``x`` holds the n coordinates of each point.
    """
    x = np.asarray(x, dtype=float)
    if c.n == 1:
        r = np.abs(x)
    else:
        if x.shape[-1] != c.n:
            raise ValueError(f"expected last axis of length {c.n}, got shape {x.shape}")
        r = np.sqrt(np.sum(x * x, axis=-1))
    return radial_profile(c, M, r, t)


def pressure(c: SelfSimilarConstants, M: float, r, t: float):
    """Pressure m * B_M**(m-1) as a function of the radius."""
    b = np.asarray(radial_profile(c, M, r, t))
    out = c.m * b ** (c.m - 1.0)
    return out if out.ndim else float(out)


def support_radius(c: SelfSimilarConstants, M: float, t: float) -> float:
    _check_t(t)
    return math.sqrt(c.C(M) / c.kappa_B) * t ** c.a2


def intersection_ratio(
    c: SelfSimilarConstants, M: float, t: float, tau: float, xtol: float = 1e-10
) -> float:
    """Radius (relative to the support radius at t) where B_M(t) and B_M(t + tau) cross.

    Inside the ratio the earlier profile is larger, outside it the later one.
    """
    _check_t(t)
    if not tau > 0:
        raise ValueError(f"tau must be positive (got {tau!r})")
    rho = support_radius(c, M, t)

    def diff(r: float) -> float:
        return radial_profile(c, M, r, t) - radial_profile(c, M, r, t + tau)

    lo, hi = 0.0, rho
    if not (diff(lo) > 0.0 and diff(hi) < 0.0):
        raise NoCrossingError(f"profiles at t={t} and t+tau={t + tau} are ordered on the support")
    root = optimize.bisect(diff, lo, hi, xtol=xtol, maxiter=500)
    return root / rho

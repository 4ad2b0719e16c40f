"""Stationary density: [P(rho_s)]_x = rho_s f with prescribed total mass.

Dividing by rho_s and integrating once gives the closed form

    rho_s(x)**(gamma - 1) = kappa + (gamma - 1) / (A * gamma) * F(x),

with F the primitive of f. Only the constant ``kappa`` is unknown; it is
fixed by the mass constraint, whose left side M(kappa) is continuous and
strictly increasing, so plain bisection always converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .grid import Grid, integrate
from .model import FluidParams, ForceField, force_eval, force_primitive, pressure

# composite Simpson nodes for the existence integral (odd count)
_CONDITION_POINTS = 20_001
_MAX_BISECTIONS = 400


class StationaryInfeasible(ValueError):
    """The existence condition fails, so no positive stationary density exists."""

    def __init__(self, lhs, mass):
        self.lhs = lhs
        self.mass = mass
        super().__init__(
            f"existence condition violated: lhs={lhs:.12g} >= mass={mass:.12g}"
        )


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExistenceCheck:
    holds: bool
    lhs: float
    margin: float


@dataclass(frozen=True)
class StationaryDensity:
    """Solved stationary profile on a grid plus its certificate."""

    profile: np.ndarray
    kappa: float
    k1: float
    k2: float
    residual_norm: float
    mass: float
    force: ForceField
    params: FluidParams

    def __call__(self, x):
        """Evaluate the closed form anywhere in [0, 1]."""
        return _closed_form(self.kappa, self.force, self.params, np.asarray(x, dtype=float))


def _slope(params: FluidParams) -> float:
    return (params.gamma - 1.0) / (params.A * params.gamma)


def _closed_form(kappa, force, params, x):
    base = kappa + _slope(params) * force_primitive(force, x)
    return np.maximum(base, 0.0) ** (1.0 / (params.gamma - 1.0))


def existence_condition(force: ForceField, gamma: float, mass: float = 1.0, A: float = 1.0):
    """Check whether a positive stationary density of the given mass exists.

    The left side is the mass of the profile that just touches vacuum at the
    minimum of F, i.e. the infimum of attainable masses.
    """
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    x = np.linspace(0.0, 1.0, _CONDITION_POINTS)
    F = force_primitive(force, x)
    b = (gamma - 1.0) / (A * gamma)
    integrand = (b * (F - F.min())) ** (1.0 / (gamma - 1.0))
    lhs = float(simpson(integrand, x=x))
    return ExistenceCheck(holds=lhs < mass, lhs=lhs, margin=mass - lhs)


def stationary_residual(profile, force: ForceField, params: FluidParams, grid: Grid) -> float:
    """L^2 norm over interior faces of the discrete (P(rho))_x - rho f."""
    rho = np.asarray(profile, dtype=float)
    if rho.shape != (grid.n,):
        raise ValueError("profile length does not match grid")
    if np.any(rho <= 0):
        raise ValueError("stationary residual needs a strictly positive profile")
    P = pressure(rho, params)
    res = np.diff(P) / grid.dx - 0.5 * (rho[1:] + rho[:-1]) * force_eval(force, grid.interior_faces)
    return float(math.sqrt(grid.dx * np.sum(res**2)))


def solve_stationary(
    force: ForceField,
    params: FluidParams,
    mass: float = 1.0,
    grid: Grid | None = None,
    tol: float = 1e-12,
    bracket: tuple[float, float] | None = None,
) -> StationaryDensity:
    """Solve the stationary problem on ``grid`` by bisection on kappa.

    Raises :class:`StationaryInfeasible` when the existence condition fails.
    ``bracket`` overrides the initial (lower, upper) guess for kappa; the upper
    end is still expanded until it encloses the target mass.
    """
    grid = grid or Grid(200)
    if not mass > 0:
        raise ValueError("mass must be positive")
    check = existence_condition(force, params.gamma, mass, params.A)
    if not check.holds:
        raise StationaryInfeasible(check.lhs, mass)

    b = _slope(params)
    expo = 1.0 / (params.gamma - 1.0)
    Fc = force_primitive(force, grid.centers)
    kappa_min = -b * float(Fc.min())

    def total(kappa):
        return grid.dx * float(np.sum(np.maximum(kappa + b * Fc, 0.0) ** expo))

    if bracket is None:
        F_sup = float(np.max(np.abs(Fc)))
        lo, hi = kappa_min + 1e-14, kappa_min + 10.0 * (1.0 + F_sup)
    else:
        lo, hi = max(bracket[0], kappa_min + 1e-14), bracket[1]
    if total(lo) > mass:
        raise BracketError(f"mass at the positivity threshold already exceeds {mass}")
    span = hi - kappa_min
    while total(hi) < mass:
        span *= 2.0
        hi = kappa_min + span
        if not math.isfinite(hi):
            raise BracketError("could not bracket the mass constraint")

    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        m = total(mid)
        if abs(m - mass) <= tol or mid in (lo, hi):
            break
        if m < mass:
            lo = mid
        else:
            hi = mid
    kappa = mid

    profile = np.maximum(kappa + b * Fc, 0.0) ** expo
    if np.any(profile <= 0):
        raise BracketError("bisection converged to a profile touching vacuum")
    return StationaryDensity(
        profile=profile,
        kappa=kappa,
        k1=float(profile.min()),
        k2=float(profile.max()),
        residual_norm=stationary_residual(profile, force, params, grid),
        mass=integrate(profile, grid),
        force=force,
        params=params,
    )

"""Functionals of a state: energy, dissipation, relative entropy, norms.

Also the least-squares decay fit used to extract exponential rates and the
per-record check of the quadratic bounds on the relative potential G.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .grid import Grid, cell_gradient, face_gradient, integrate, lp_norm, w1p_norm
from .model import FluidParams, ForceField, force_primitive, pressure, pressure_derivative, viscosity
from .solver import State
from .stationary import StationaryDensity

RECORD_COLUMNS = (
    "t",
    "mass",
    "sup_rho",
    "energy",
    "dissipation",
    "lyapunov",
    "dev_l1",
    "dev_l2",
    "u_l2",
    "u_w12",
    "u_w1inf",
    "gradrho_l2",
)


class FitInfeasible(ValueError):
    pass


@dataclass(frozen=True)
class DiagnosticRecord:
    """One time sample of every audited functional.

    Stationary-relative entries (``lyapunov``, ``dev_l1``, ``dev_l2``) are NaN
    when no stationary density exists for the run.
    """

    t: float
    mass: float
    sup_rho: float
    energy: float
    dissipation: float
    lyapunov: float
    dev_l1: float
    dev_l2: float
    u_l2: float
    u_w12: float
    u_w1inf: float
    gradrho_l2: float

    def as_row(self):
        return tuple(getattr(self, c) for c in RECORD_COLUMNS)

    def to_csv_row(self) -> str:
        return ",".join(repr(float(v)) for v in self.as_row())

    @classmethod
    def from_csv_row(cls, line: str):
        vals = [float(v) for v in line.split(",")]
        if len(vals) != len(RECORD_COLUMNS):
            raise ValueError(f"expected {len(RECORD_COLUMNS)} columns, got {len(vals)}")
        return cls(*vals)


assert tuple(f.name for f in fields(DiagnosticRecord)) == RECORD_COLUMNS


@dataclass(frozen=True)
class DecayFit:
    alpha: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def _cell_velocity(u):
    return 0.5 * (u[1:] + u[:-1])


def kinetic_energy(state: State, grid: Grid) -> float:
    return 0.5 * integrate(state.rho * _cell_velocity(state.u) ** 2, grid)


def energy(state: State, params: FluidParams, force: ForceField, grid: Grid) -> float:
    """Total energy: kinetic + internal - potential of the force."""
    internal = integrate(pressure(state.rho, params), grid) / (params.gamma - 1.0)
    potential = integrate(state.rho * force_primitive(force, grid.centers), grid)
    return kinetic_energy(state, grid) + internal - potential


def dissipation(state: State, params: FluidParams, grid: Grid) -> float:
    """Instantaneous viscous dissipation, integral of mu(rho) u_x**2."""
    ux = face_gradient(state.u, grid)
    return integrate(viscosity(state.rho, params.viscosity) * ux**2, grid)


def g_potential(rho, rho_s, params: FluidParams):
    """Relative potential G(rho; rho_s) >= 0, vanishing only at rho = rho_s."""
    rho_s_arr = np.asarray(rho_s, dtype=float)
    if np.any(rho_s_arr <= 0):
        raise ValueError("rho_s must be positive")
    rho_arr = np.asarray(rho, dtype=float)
    g = (
        pressure(rho_arr, params)
        - pressure(rho_s_arr, params)
        - pressure_derivative(rho_s_arr, params) * (rho_arr - rho_s_arr)
    ) / (params.gamma - 1.0)
    # convexity makes G >= 0; clip the round-off below zero
    g = np.maximum(g, 0.0)
    return float(g) if np.ndim(g) == 0 else g


def lyapunov(state: State, stationary: StationaryDensity, params: FluidParams, grid: Grid) -> float:
    if stationary.profile.shape != state.rho.shape:
        raise ValueError("stationary profile and state live on different grids")
    return kinetic_energy(state, grid) + integrate(
        g_potential(state.rho, stationary.profile, params), grid
    )


def deviation_norms(state: State, stationary: StationaryDensity, p, grid: Grid):
    """(||rho - rho_s||_{L^p}, ||u||_{W^{1,p}})."""
    if stationary.profile.shape != state.rho.shape:
        raise ValueError("stationary profile and state live on different grids")
    return lp_norm(state.rho - stationary.profile, p, grid), w1p_norm(state.u, p, grid)


def entropy_bounds(lo: float, hi: float, params: FluidParams):
    """Constants (M1, M2) with M1 (r - s)**2 <= G(r; s) <= M2 (r - s)**2
    for all r, s in [lo, hi].

    G is the double integral of P'(xi)/xi, so it equals half of that integrand
    at an intermediate point times (r - s)**2. The bounds below use the
    monotonicity of P' (min P' over the largest xi, max P' over the smallest);
    with ``lo = 0`` the upper constant is infinite.
    """
    if lo < 0 or hi < lo:
        raise ValueError("need 0 <= lo <= hi")
    dp_lo = pressure_derivative(lo, params)
    dp_hi = pressure_derivative(hi, params)
    m1 = dp_lo / (2.0 * hi) if hi > 0 else 0.0
    m2 = dp_hi / (2.0 * lo) if lo > 0 else math.inf
    return m1, m2


def entropy_sandwich_violations(
    state: State, stationary: StationaryDensity, params: FluidParams
) -> int:
    """Count cells where the quadratic bounds on G fail beyond round-off."""
    rho, rs = state.rho, stationary.profile
    lo = min(float(rho.min()), stationary.k1)
    hi = max(float(rho.max()), stationary.k2)
    m1, m2 = entropy_bounds(lo, hi, params)
    g = g_potential(rho, rs, params)
    d2 = (rho - rs) ** 2
    # absolute round-off of the three-term closed form of G
    slack = 64 * np.finfo(float).eps * (
        pressure(rho, params) + pressure(rs, params) + pressure_derivative(rs, params) * np.abs(rho - rs)
    ) / (params.gamma - 1.0)
    below = g < m1 * d2 - slack
    above = (g > m2 * d2 + slack) if math.isfinite(m2) else np.zeros_like(below)
    return int(np.count_nonzero(below | above))


def fit_decay(times, values, window=None, min_samples: int = 10) -> DecayFit:
    """Least-squares fit of log(value) = intercept - alpha * t.

    Samples outside ``window`` (inclusive) or with nonpositive values are
    dropped. A constant series gives alpha = 0 and r_squared = 1.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = (float(t.min()), float(t.max()))
    t0, t1 = window
    keep = (t >= t0) & (t <= t1) & (v > 0) & np.isfinite(v)
    if np.count_nonzero(keep) < min_samples:
        raise FitInfeasible(
            f"only {np.count_nonzero(keep)} positive samples in window {window}, need {min_samples}"
        )
    t, y = t[keep], np.log(v[keep])
    if np.ptp(y) == 0.0:
        # constant series; centring would leave round-off residuals behind
        return DecayFit(alpha=0.0, intercept=float(y[0]), r_squared=1.0, window=(t0, t1))
    tc = t - t.mean()
    yc = y - y.mean()
    sxx = float(tc @ tc)
    slope = float(tc @ yc) / sxx
    intercept = float(y.mean() - slope * t.mean())
    ss_res = float(np.sum((yc - slope * tc) ** 2))
    ss_tot = float(yc @ yc)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return DecayFit(alpha=-slope, intercept=intercept, r_squared=r2, window=(t0, t1))


def record(
    state: State,
    params: FluidParams,
    force: ForceField,
    grid: Grid,
    stationary: StationaryDensity | None = None,
) -> DiagnosticRecord:
    if stationary is not None:
        lyap = lyapunov(state, stationary, params, grid)
        dev = state.rho - stationary.profile
        dev_l1, dev_l2 = lp_norm(dev, 1, grid), lp_norm(dev, 2, grid)
    else:
        lyap = dev_l1 = dev_l2 = math.nan
    return DiagnosticRecord(
        t=float(state.t),
        mass=integrate(state.rho, grid),
        sup_rho=lp_norm(state.rho, math.inf, grid),
        energy=energy(state, params, force, grid),
        dissipation=dissipation(state, params, grid),
        lyapunov=lyap,
        dev_l1=dev_l1,
        dev_l2=dev_l2,
        u_l2=lp_norm(state.u, 2, grid),
        u_w12=w1p_norm(state.u, 2, grid),
        u_w1inf=w1p_norm(state.u, math.inf, grid),
        gradrho_l2=lp_norm(cell_gradient(state.rho, grid), 2, grid),
    )


def records_to_columns(records) -> dict[str, np.ndarray]:
    """Column view of a record list, e.g. ``cols['dev_l2']``."""
    rows = np.array([r.as_row() for r in records], dtype=float).reshape(-1, len(RECORD_COLUMNS))
    return {name: rows[:, k] for k, name in enumerate(RECORD_COLUMNS)}


def as_dict(rec: DiagnosticRecord) -> dict:
    return asdict(rec)

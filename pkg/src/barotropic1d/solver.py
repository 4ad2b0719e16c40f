"""Time marching for the 1D barotropic Navier-Stokes system with vacuum.

Staggered finite differences: density at cell centres, velocity at faces.
One step is

1. explicit conservative upwind update of the density (zero flux through the
   walls, so mass is conserved to round-off and positivity holds for
   ``cfl <= 1/2``);
2. a semi-implicit momentum update at interior faces: transport, pressure
   and force are explicit, the viscous term is backward Euler. The viscous
   matrix stays diagonally dominant at vacuum because mu >= mu_lower > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numba
import numpy as np

from .grid import Grid, integrate
from .model import (
    FluidParams,
    ForceField,
    force_eval,
    pressure,
    sound_speed,
    viscosity,
)


class NumericalFailure(RuntimeError):
    """A run produced a non-finite or inadmissible state."""

    def __init__(self, message, t=None, records=None, state=None):
        super().__init__(message if t is None else f"{message} (t={t:.6g})")
        self.t = t
        self.records = records or []
        self.state = state


class InitialDataError(ValueError):
    pass


@dataclass(frozen=True)
class State:
    t: float
    rho: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.4
    dt_max: float = 1e-2
    vacuum_floor: float = 0.0
    theta_visc: float = 1.0

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if self.vacuum_floor < 0:
            raise ValueError("vacuum_floor must be nonnegative")
        if self.theta_visc != 1.0:
            raise ValueError("only the backward-Euler viscous update (theta_visc=1) is supported")


@dataclass(frozen=True)
class InitialData:
    """Initial density and velocity.

    ``rho0`` and ``u0`` are callables of x (vectorised) or arrays already
    sampled at cell centres / faces respectively.
    """

    rho0: Callable | np.ndarray
    u0: Callable | np.ndarray | None = None
    normalize_mass: bool = True


# ---------------------------------------------------------------------------
# Thomas elimination


@numba.njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    n = diag.size
    c = np.empty(n)
    d = np.empty(n)
    piv = diag[0]
    if piv == 0.0 or not np.isfinite(piv):
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    c[0] = upper[0] / piv
    d[0] = rhs[0] / piv
    for k in range(1, n):
        piv = diag[k] - lower[k] * c[k - 1]
        if piv == 0.0 or not np.isfinite(piv):
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        c[k] = upper[k] / piv
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / piv
    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for k in range(n - 2, -1, -1):
        x[k] = d[k] - c[k] * x[k + 1]
    return x


def tridiagonal_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system by Thomas elimination.

    All four arrays have the system size ``m``; ``lower[0]`` and
    ``upper[m - 1]`` are ignored. Raises ``ZeroDivisionError`` on a zero
    pivot (no pivoting is done, so the matrix should be diagonally dominant).
    """
    arrays = [np.ascontiguousarray(a, dtype=float) for a in (lower, diag, upper, rhs)]
    m = arrays[1].size
    if m == 0 or any(a.shape != (m,) for a in arrays):
        raise ValueError("tridiagonal_solve: coefficient arrays must share one nonzero length")
    return _thomas(*arrays)


# ---------------------------------------------------------------------------


def _sample(spec, points):
    if callable(spec):
        return np.asarray(spec(points), dtype=float) * np.ones_like(points)
    return np.asarray(spec, dtype=float).copy()


def init_state(data: InitialData, grid: Grid) -> State:
    rho = _sample(data.rho0, grid.centers)
    if rho.shape != (grid.n,):
        raise InitialDataError(f"rho0 must have {grid.n} cell samples, got {rho.shape}")
    bad = np.flatnonzero(~(rho >= 0))
    if bad.size:
        i = int(bad[0])
        raise InitialDataError(f"rho0 is negative at x={grid.centers[i]:.6g} (value {rho[i]!r})")
    if data.u0 is None:
        u = np.zeros(grid.n + 1)
    else:
        u = _sample(data.u0, grid.faces)
    if u.shape != (grid.n + 1,):
        raise InitialDataError(f"u0 must have {grid.n + 1} face samples, got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InitialDataError("u0 has non-finite samples")
    scale = 1.0 + float(np.max(np.abs(u)))
    if abs(u[0]) > 1e-12 * scale or abs(u[-1]) > 1e-12 * scale:
        raise InitialDataError(f"u0 must vanish at both walls, got u0(0)={u[0]!r}, u0(1)={u[-1]!r}")
    u[0] = u[-1] = 0.0
    if data.normalize_mass:
        m = integrate(rho, grid)
        if m <= 0:
            raise InitialDataError("rho0 has zero mass and cannot be normalized")
        rho = rho / m
    return State(0.0, rho, u)


@dataclass(frozen=True)
class CompatibilityResult:
    residual: float
    excluded: int


def compatibility_residual(
    state0: State, params: FluidParams, grid: Grid, threshold: float = 0.0
) -> CompatibilityResult:
    """L^2 norm of g = rho**-1/2 * ([mu(rho) u_x]_x - P_x) over non-vacuum cells.

    A finite value certifies the compatibility condition needed for classical
    solutions. The stress ``mu(rho) u_x - P`` lives at cell centres; its
    derivative is differenced centrally inside and one-sidedly at the walls.
    Cells with ``rho <= threshold`` are excluded and counted.
    """
    rho = state0.rho
    stress = viscosity(rho, params.viscosity) * np.diff(state0.u) / grid.dx - pressure(rho, params)
    dstress = np.gradient(stress, grid.dx, edge_order=1)
    keep = rho > threshold
    if not np.any(keep):
        raise ValueError(f"every cell is at or below the vacuum threshold {threshold!r}")
    g = dstress[keep] / np.sqrt(rho[keep])
    return CompatibilityResult(
        residual=float(np.sqrt(grid.dx * np.sum(g**2))), excluded=int(np.count_nonzero(~keep))
    )


def compute_dt(state: State, config: SolverConfig, params: FluidParams, grid: Grid) -> float:
    """Advective/acoustic CFL step; the implicit viscous term adds no limit."""
    rho = state.rho
    rho_face = np.empty(grid.n + 1)
    rho_face[1:-1] = 0.5 * (rho[1:] + rho[:-1])
    rho_face[0], rho_face[-1] = rho[0], rho[-1]
    speed = float(np.max(np.abs(state.u) + sound_speed(rho_face, params)))
    if speed <= 0:
        return config.dt_max
    return min(config.dt_max, config.cfl * grid.dx / speed)


def step(
    state: State,
    dt: float,
    params: FluidParams,
    force: ForceField,
    grid: Grid,
    config: SolverConfig,
    _force_faces: np.ndarray | None = None,
) -> State:
    rho, u = state.rho, state.u
    dx = grid.dx

    # (a) continuity: upwind mass flux at interior faces, zero at the walls
    ui = u[1:-1]
    flux = np.zeros(grid.n + 1)
    flux[1:-1] = np.where(ui >= 0.0, ui * rho[:-1], ui * rho[1:])
    rho_new = rho - (dt / dx) * np.diff(flux)
    if np.any(rho_new < 0):
        # exact zero stays zero; anything else means the CFL bound was broken
        raise NumericalFailure("negative density after continuity update", state.t + dt)

    # (b) momentum at interior faces j = 1..n-1
    m = 0.5 * (rho_new[1:] + rho_new[:-1])
    if config.vacuum_floor > 0:
        m = np.maximum(m, config.vacuum_floor)
    mu = viscosity(rho_new, params.viscosity)
    P = pressure(rho_new, params)
    fj = force_eval(force, grid.interior_faces) if _force_faces is None else _force_faces

    du_back = (u[1:-1] - u[:-2]) / dx
    du_fwd = (u[2:] - u[1:-1]) / dx
    adv = m * ui * np.where(ui >= 0.0, du_back, du_fwd)
    rhs = m * ui / dt - adv - np.diff(P) / dx + m * fj

    inv_dx2 = 1.0 / (dx * dx)
    lower = -mu[:-1] * inv_dx2
    upper = -mu[1:] * inv_dx2
    diag = m / dt + (mu[:-1] + mu[1:]) * inv_dx2
    u_new = np.zeros(grid.n + 1)
    u_new[1:-1] = _thomas(lower, diag, upper, rhs)
    return State(state.t + dt, rho_new, u_new)


def _check_finite(state):
    return bool(np.all(np.isfinite(state.rho)) and np.all(np.isfinite(state.u)))


def run(
    initial: InitialData | State,
    params: FluidParams,
    force: ForceField,
    grid: Grid,
    config: SolverConfig,
    t_end: float,
    sample_every: float,
    recorder: Callable[[State], object] | None = None,
    on_step: Callable[[State, State, float], None] | None = None,
):
    """March to ``t_end`` and sample diagnostics every ``sample_every``.

    ``recorder`` maps a state to a record (default: the state itself);
    ``on_step(old, new, dt)`` is called after every step. Returns
    ``(final_state, records)``. Sampling times are hit exactly, so two runs of
    the same inputs take identical steps.
    """
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if not sample_every > 0:
        raise ValueError("sample_every must be positive")
    state = initial if isinstance(initial, State) else init_state(initial, grid)
    recorder = recorder or (lambda s: s)
    fj = force_eval(force, grid.interior_faces)
    records = [recorder(state)]
    k = 1
    while state.t < t_end:
        t_next = min(k * sample_every, t_end)
        while state.t < t_next:
            dt = compute_dt(state, config, params, grid)
            if state.t + dt >= t_next - 1e-12 * max(1.0, t_next):
                dt = t_next - state.t
            try:
                new = step(state, dt, params, force, grid, config, _force_faces=fj)
            except (ZeroDivisionError, NumericalFailure) as exc:
                raise NumericalFailure(str(exc), state.t, records, state) from exc
            if not _check_finite(new):
                raise NumericalFailure("non-finite value in state", new.t, records, state)
            if new.t >= t_next:
                new = replace(new, t=t_next)
            if on_step is not None:
                on_step(state, new, dt)
            state = new
        records.append(recorder(state))
        k += 1
    return state, records


# ---------------------------------------------------------------------------
# checkpoint files


def write_checkpoint(path, state: State, grid: Grid, header: dict | None = None):
    """CSV checkpoint: a ``cells`` section (x_center, rho) then ``faces`` (x_face, u)."""
    lines = [f"# {k}: {v}" for k, v in (header or {}).items()]
    lines.append(f"# t: {state.t!r}")
    lines.append(f"# n: {grid.n}")
    lines.append("# section: cells")
    lines.append("x_center,rho")
    lines += [f"{x!r},{r!r}" for x, r in zip(grid.centers.tolist(), state.rho.tolist())]
    lines.append("# section: faces")
    lines.append("x_face,u")
    lines += [f"{x!r},{v!r}" for x, v in zip(grid.faces.tolist(), state.u.tolist())]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_checkpoint(path) -> tuple[State, Grid]:
    sections: dict[str, list[float]] = {}
    current = None
    t = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                key, val = key.strip(), val.strip()
                if key == "section":
                    current = val
                    sections[current] = []
                elif key == "t":
                    t = float(val)
                continue
            if current is None or line[0].isalpha():
                continue
            sections[current].append(float(line.split(",")[1]))
    rho = np.array(sections["cells"])
    u = np.array(sections["faces"])
    grid = Grid(rho.size)
    if u.size != grid.n + 1:
        raise ValueError("checkpoint face section does not match its cell section")
    return State(0.0 if t is None else t, rho, u), grid


__all__ = [
    "InitialData",
    "InitialDataError",
    "NumericalFailure",
    "SolverConfig",
    "State",
    "CompatibilityResult",
    "compatibility_residual",
    "compute_dt",
    "init_state",
    "read_checkpoint",
    "run",
    "step",
    "tridiagonal_solve",
    "write_checkpoint",
]

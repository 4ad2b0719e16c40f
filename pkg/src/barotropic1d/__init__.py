"""Compressible barotropic Navier-Stokes on [0, 1] with vacuum and a
density-dependent viscosity: stationary states, time marching, diagnostics."""

from .diagnostics import DecayFit, DiagnosticRecord, FitInfeasible, fit_decay, lyapunov, record
from .grid import Grid, integrate, lp_norm
from .model import (
    DomainError,
    FluidParams,
    ForceField,
    ViscosityLaw,
    pressure,
    pressure_derivative,
    sound_speed,
    viscosity,
)
from .solver import (
    InitialData,
    NumericalFailure,
    SolverConfig,
    State,
    compatibility_residual,
    init_state,
    run,
    step,
)
from .stationary import StationaryDensity, StationaryInfeasible, existence_condition, solve_stationary

__version__ = "0.1.0"

__all__ = [
    "DecayFit",
    "DiagnosticRecord",
    "DomainError",
    "FitInfeasible",
    "FluidParams",
    "ForceField",
    "Grid",
    "InitialData",
    "NumericalFailure",
    "SolverConfig",
    "State",
    "StationaryDensity",
    "StationaryInfeasible",
    "ViscosityLaw",
    "compatibility_residual",
    "existence_condition",
    "fit_decay",
    "init_state",
    "integrate",
    "lp_norm",
    "lyapunov",
    "pressure",
    "pressure_derivative",
    "record",
    "run",
    "solve_stationary",
    "sound_speed",
    "step",
    "viscosity",
]

"""End-to-end scenario runs, CSV output and the self-convergence harness."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .config import RunConfig, initial_data, serialize_config
from .grid import Grid, integrate, lp_norm
from .solver import NumericalFailure, State, init_state, run, write_checkpoint
from .stationary import StationaryDensity, existence_condition, solve_stationary

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4


@dataclass
class ScenarioResult:
    status: int
    records: list
    summary: dict
    final_state: State | None = None
    stationary: StationaryDensity | None = None
    files: dict = field(default_factory=dict)


def _header(cfg: RunConfig, **extra) -> list[str]:
    lines = [
        f"# scenario: {cfg.scenario}",
        f"# config_hash: {cfg.config_hash()}",
        f"# n: {cfg.n}",
    ]
    lines += [f"# {k}: {v}" for k, v in extra.items()]
    return lines


def write_records(path, records, cfg: RunConfig):
    lines = _header(cfg) + [",".join(diag.RECORD_COLUMNS)]
    lines += [r.to_csv_row() for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_records(path) -> list:
    out = []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#") or line.startswith("t,"):
            continue
        out.append(diag.DiagnosticRecord.from_csv_row(line))
    return out


def write_stationary(path, st: StationaryDensity, grid: Grid, cfg: RunConfig):
    lines = _header(
        cfg,
        kappa=repr(st.kappa),
        k1=repr(st.k1),
        k2=repr(st.k2),
        residual=repr(st.residual_norm),
        mass=repr(st.mass),
    )
    lines.append("x,rho_s")
    lines += [f"{x!r},{r!r}" for x, r in zip(grid.centers.tolist(), st.profile.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def solve_for(cfg: RunConfig, mass: float = 1.0) -> StationaryDensity:
    return solve_stationary(cfg.force, cfg.fluid, mass, cfg.grid, tol=cfg.stationary_tol)


def _fit_entry(summary, name, cols, window):
    try:
        fit = diag.fit_decay(cols["t"], cols[name], window)
        summary[f"alpha_{name}"] = fit.alpha
        summary[f"r2_{name}"] = fit.r_squared
    except diag.FitInfeasible as exc:
        summary[f"alpha_{name}"] = math.nan
        summary[f"r2_{name}"] = math.nan
        summary[f"note_{name}"] = str(exc)


def summarize(records, cfg: RunConfig, window=None) -> dict:
    cols = diag.records_to_columns(records)
    t = cols["t"]
    if window is None:
        window = cfg.fit_window or (0.5 * float(t[-1]), float(t[-1]))
    summary = {
        "fit_window": f"{window[0]!r}, {window[1]!r}",
        "final_t": float(t[-1]),
        "final_sup_rho": float(cols["sup_rho"][-1]),
        "max_sup_rho": float(np.max(cols["sup_rho"])),
        "max_mass_drift": float(np.max(np.abs(cols["mass"] - cols["mass"][0]))),
    }
    _fit_entry(summary, "dev_l2", cols, window)
    _fit_entry(summary, "u_w12", cols, window)
    sel = (t >= window[0]) & (t <= window[1])
    g = cols["gradrho_l2"][sel]
    if np.count_nonzero(sel) >= 2 and np.ptp(t[sel]) > 0:
        summary["gradrho_trend_slope"] = float(np.polyfit(t[sel], g, 1)[0])
        summary["gradrho_log_slope"] = float(np.polyfit(t[sel], np.log(g), 1)[0]) if np.all(g > 0) else math.nan
    else:
        summary["gradrho_trend_slope"] = math.nan
        summary["gradrho_log_slope"] = math.nan
    return summary


def write_summary(path, summary: dict, cfg: RunConfig):
    lines = _header(cfg)
    for k, v in summary.items():
        lines.append(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def prepare(cfg: RunConfig):
    """Initial state, the stationary density of the same mass (or None when
    the existence condition fails) and the condition itself."""
    # "stationary" initial profiles are built on the unit-mass stationary density
    base = solve_for(cfg) if cfg.rho0.kind == "stationary" else None
    state0 = init_state(initial_data(cfg, base), cfg.grid)
    mass0 = integrate(state0.rho, cfg.grid)
    check = existence_condition(cfg.force, cfg.fluid.gamma, mass0, cfg.fluid.A)
    st = solve_for(cfg, mass0) if check.holds else None
    return state0, st, check


def run_scenario(cfg: RunConfig, output_dir=None, write=True) -> ScenarioResult:
    """Run one configured scenario and write its CSV/summary files.

    Files (in ``output_dir`` or ``cfg.output_dir``): ``diagnostics.csv``,
    ``stationary.csv`` (only when the stationary problem is feasible),
    ``final_state.csv``, ``summary.txt`` and a copy of the config.
    """
    out = Path(output_dir or cfg.output_dir or f"out/{cfg.scenario}")
    grid = cfg.grid
    summary: dict = {"scenario": cfg.scenario, "status": "ok"}
    files = {}
    if write:
        out.mkdir(parents=True, exist_ok=True)
        files["config"] = out / "config.ini"
        files["config"].write_text(serialize_config(cfg))

    try:
        state0, st, check = prepare(cfg)
    except ValueError as exc:
        summary["status"] = "config error"
        summary["reason"] = str(exc)
        if write:
            files["summary"] = out / "summary.txt"
            write_summary(files["summary"], summary, cfg)
        return ScenarioResult(EXIT_CONFIG, [], summary, files=files)

    summary["existence_lhs"] = check.lhs
    summary["existence_margin"] = check.margin
    if st is None:
        summary["stationary"] = f"existence condition violated, lhs={check.lhs!r}"

    if st is not None:
        summary["kappa"] = st.kappa
        summary["k1"] = st.k1
        summary["k2"] = st.k2
        summary["stationary_residual"] = st.residual_norm
        if write:
            files["stationary"] = out / "stationary.csv"
            write_stationary(files["stationary"], st, grid, cfg)

    def recorder(s):
        return diag.record(s, cfg.fluid, cfg.force, grid, st)

    status = EXIT_OK
    final = None
    try:
        final, records = run(
            state0, cfg.fluid, cfg.force, grid, cfg.solver_config, cfg.t_end, cfg.sample_every, recorder
        )
    except NumericalFailure as exc:
        log.error("scenario %s aborted: %s", cfg.scenario, exc)
        records = exc.records
        final = exc.state
        status = EXIT_NUMERICAL
        summary["status"] = "aborted"
        summary["reason"] = str(exc)

    if records:
        summary.update(summarize(records, cfg))
    if write:
        files["diagnostics"] = out / "diagnostics.csv"
        write_records(files["diagnostics"], records, cfg)
        if final is not None:
            files["final_state"] = out / "final_state.csv"
            write_checkpoint(
                files["final_state"], final, grid,
                {"scenario": cfg.scenario, "config_hash": cfg.config_hash()},
            )
        files["summary"] = out / "summary.txt"
        write_summary(files["summary"], summary, cfg)
    return ScenarioResult(status, records, summary, final, st, files)


# ---------------------------------------------------------------------------


def _final_state(cfg: RunConfig) -> State:
    st = None
    if cfg.rho0.kind == "stationary":
        st = solve_for(cfg)
    final, _ = run(
        initial_data(cfg, st), cfg.fluid, cfg.force, cfg.grid, cfg.solver_config,
        cfg.t_end, max(cfg.t_end, cfg.sample_every),
    )
    return final


def restrict(fine: State, coarse: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Fine-grid state on the coarse grid: pair-averaged cells, coincident faces."""
    if fine.rho.size != 2 * coarse.n:
        raise ValueError("restriction needs a grid with exactly twice the cells")
    return 0.5 * (fine.rho[0::2] + fine.rho[1::2]), fine.u[0::2]


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    error: float
    order: float


def convergence_study(cfg: RunConfig, resolutions, output_dir=None, max_workers: int = 1, write=True):
    """L^2 self-differences between consecutive doubled grids at ``cfg.t_end``.

    ``error`` in the row for n compares the n solution with the restricted 2n
    one; ``order`` is log2 of the ratio of consecutive errors (NaN in the
    first row). Persisted to ``convergence.csv``.
    """
    res = [int(r) for r in resolutions]
    if len(res) < 3:
        raise ValueError("convergence study needs at least three resolutions")
    if any(b != 2 * a for a, b in zip(res, res[1:])):
        raise ValueError(f"resolutions must double each time, got {res}")
    cfgs = [cfg.with_updates(n=n) for n in res]
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            finals = list(pool.map(_final_state, cfgs))
    else:
        finals = [_final_state(c) for c in cfgs]

    errors = []
    for n, coarse, fine in zip(res, finals, finals[1:]):
        g = Grid(n)
        rho_f, u_f = restrict(fine, g)
        errors.append(lp_norm(coarse.rho - rho_f, 2, g) + lp_norm(coarse.u - u_f, 2, g))
    rows = []
    for k, (n, e) in enumerate(zip(res, errors)):
        order = math.nan if k == 0 else math.log2(errors[k - 1] / e)
        rows.append(ConvergenceRow(n, e, order))
    if write:
        out = Path(output_dir or cfg.output_dir or f"out/{cfg.scenario}")
        out.mkdir(parents=True, exist_ok=True)
        lines = _header(cfg, t_compare=repr(cfg.t_end), resolutions=",".join(map(str, res)))
        lines.append("n,error,order")
        lines += [f"{r.n},{r.error!r},{r.order!r}" for r in rows]
        (out / "convergence.csv").write_text("\n".join(lines) + "\n")
    return rows

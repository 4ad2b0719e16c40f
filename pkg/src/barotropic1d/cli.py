"""Command-line entry point.

::

    barotropic1d run <config|preset>
    barotropic1d stationary <config|preset>
    barotropic1d converge <config|preset> --resolutions 50,100,200
    barotropic1d check-condition <config|preset>
    barotropic1d compat <config|preset> [--threshold 0]

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 infeasible
stationary condition (``stationary`` only).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import PRESETS, ConfigError, initial_data, load_config
from .scenarios import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_NUMERICAL,
    EXIT_OK,
    convergence_study,
    run_scenario,
    solve_for,
    write_stationary,
)
from .solver import NumericalFailure, compatibility_residual, init_state
from .stationary import BracketError, StationaryInfeasible, existence_condition

log = logging.getLogger("barotropic1d")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barotropic1d",
        description="1D compressible barotropic Navier-Stokes with vacuum: runs, steady states, audits",
        epilog=f"Packaged presets: {', '.join(PRESETS)}",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="config file path or preset name")
        p.add_argument("-o", "--output-dir", default=None, help="override run.output_dir")
        return p

    add("run", "time-march a scenario and write diagnostics")
    add("stationary", "solve the stationary problem and write stationary.csv")
    conv = add("converge", "self-convergence study on doubled grids")
    conv.add_argument("--resolutions", default="50,100,200", help="comma-separated, each double the last")
    conv.add_argument("--workers", type=int, default=1, help="parallel runs (processes)")
    add("check-condition", "print lhs and margin of the stationary existence condition")
    compat = add("compat", "print the compatibility residual of the initial data")
    compat.add_argument("--threshold", type=float, default=0.0, help="vacuum threshold for exclusion")
    return parser


def _cmd_run(cfg, args):
    res = run_scenario(cfg, args.output_dir)
    for k, v in res.summary.items():
        print(f"{k} = {v}")
    return res.status


def _cmd_stationary(cfg, args):
    try:
        st = solve_for(cfg)
    except StationaryInfeasible as exc:
        print(f"infeasible: lhs={exc.lhs!r} mass={exc.mass!r}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BracketError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = Path(args.output_dir or cfg.output_dir or f"out/{cfg.scenario}")
    out.mkdir(parents=True, exist_ok=True)
    write_stationary(out / "stationary.csv", st, cfg.grid, cfg)
    print(f"kappa = {st.kappa!r}\nk1 = {st.k1!r}\nk2 = {st.k2!r}\nresidual = {st.residual_norm!r}")
    print(f"wrote {out / 'stationary.csv'}")
    return EXIT_OK


def _cmd_converge(cfg, args):
    try:
        res = [int(v) for v in args.resolutions.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--resolutions: cannot parse {args.resolutions!r}") from None
    try:
        rows = convergence_study(cfg, res, args.output_dir, max_workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print("n,error,order")
    for r in rows:
        print(f"{r.n},{r.error:.6e},{r.order:.4f}")
    return EXIT_OK


def _cmd_check(cfg, args):
    c = existence_condition(cfg.force, cfg.fluid.gamma, 1.0, cfg.fluid.A)
    print(f"lhs = {c.lhs!r}\nmass = 1.0\nmargin = {c.margin!r}\nholds = {c.holds}")
    # every force variant is bounded and in H^1; the norms are reported, not enforced
    print(f"force_sup = {cfg.force.sup_norm()!r}\nforce_h1 = {cfg.force.h1_norm()!r}")
    return EXIT_OK


def _cmd_compat(cfg, args):
    base = solve_for(cfg) if cfg.rho0.kind == "stationary" else None
    state0 = init_state(initial_data(cfg, base), cfg.grid)
    res = compatibility_residual(state0, cfg.fluid, cfg.grid, args.threshold)
    print(f"residual = {res.residual!r}\nexcluded_cells = {res.excluded}")
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "stationary": _cmd_stationary,
    "converge": _cmd_converge,
    "check-condition": _cmd_check,
    "compat": _cmd_compat,
}


def main(argv=None) -> int:
    args = create_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, StationaryInfeasible) as exc:
        # infeasible here means a 'stationary' initial profile could not be built
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

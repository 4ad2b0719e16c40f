"""Run configuration: a flat INI document with five sections.

::

    [grid]      n
    [fluid]     gamma, A, viscosity = constant|affine|power|table, law keys
    [force]     kind = zero|constant|poly|sin|table, kind keys
    [initial]   rho0 = constant|poly|sin|table|stationary, u0 = zero|sin|poly|table
    [run]       t_end, sample_every, cfl, dt_max, ...

Every key is checked: unknown keys, keys that the chosen variant does not
use, missing keys and bad values all raise :class:`ConfigError` naming the
offending ``section.key``. :func:`serialize_config` is the exact inverse of
:func:`parse_config`.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .grid import Grid
from .model import FluidParams, ForceField, ViscosityLaw
from .solver import InitialData, SolverConfig


class ConfigError(ValueError):
    pass


# variant -> (required keys, optional keys with defaults)
_VISCOSITY_KEYS = {
    "constant": (("mu0",), {}),
    "affine": (("mu_bar", "slope"), {}),
    "power": (("mu_bar", "coeff", "theta"), {}),
    "table": (("table_rho", "table_mu"), {}),
}
_FORCE_KEYS = {
    "zero": ((), {}),
    "constant": (("value",), {}),
    "poly": (("coefficients",), {}),
    "sin": (("amplitude", "frequency"), {"phase": 0.0}),
    "table": (("x", "values"), {}),
}
_RHO0_KEYS = {
    "constant": (("rho0_value",), {}),
    "poly": (("rho0_coefficients",), {}),
    "sin": (("rho0_mean", "rho0_amplitude", "rho0_frequency"), {"rho0_phase": 0.0}),
    "table": (("rho0_x", "rho0_values"), {}),
    "stationary": ((), {"rho0_amplitude": 0.0, "rho0_frequency": 1.0, "rho0_phase": 0.0}),
}
_U0_KEYS = {
    "zero": ((), {}),
    "sin": (("u0_amplitude",), {"u0_mode": 1}),
    "poly": (("u0_coefficients",), {}),
    "table": (("u0_x", "u0_values"), {}),
}

_LIST_KEYS = {
    "table_rho", "table_mu", "coefficients", "x", "values",
    "rho0_coefficients", "rho0_x", "rho0_values", "u0_coefficients", "u0_x", "u0_values",
    "fit_window",
}
_INT_KEYS = {"n", "u0_mode"}
_STR_KEYS = {"viscosity", "kind", "rho0", "u0", "scenario", "output_dir"}
_BOOL_KEYS = {"normalize_mass"}

_RUN_DEFAULTS = {
    "cfl": 0.4,
    "dt_max": 1e-2,
    "stationary_tol": 1e-12,
    "vacuum_floor": 0.0,
    "scenario": "custom",
}


@dataclass(frozen=True)
class FieldSpec:
    """A named closed-form or tabulated initial profile."""

    kind: str
    params: tuple = ()

    def keys(self, prefix):
        table = _RHO0_KEYS if prefix == "rho0" else _U0_KEYS
        req, opt = table[self.kind]
        return list(req) + list(opt)


@dataclass(frozen=True)
class RunConfig:
    n: int
    fluid: FluidParams
    force: ForceField
    rho0: FieldSpec
    u0: FieldSpec = FieldSpec("zero")
    normalize_mass: bool = True
    t_end: float = 1.0
    sample_every: float = 0.1
    cfl: float = 0.4
    dt_max: float = 1e-2
    vacuum_floor: float = 0.0
    scenario: str = "custom"
    output_dir: str = ""
    stationary_tol: float = 1e-12
    fit_window: tuple | None = None

    @property
    def grid(self) -> Grid:
        return Grid(self.n)

    @property
    def solver_config(self) -> SolverConfig:
        return SolverConfig(cfl=self.cfl, dt_max=self.dt_max, vacuum_floor=self.vacuum_floor)

    def with_updates(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def config_hash(self) -> str:
        return hashlib.sha256(serialize_config(self).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# value parsing


def _parse_value(section, key, raw):
    path = f"{section}.{key}"
    raw = raw.strip()
    try:
        if key in _LIST_KEYS:
            vals = [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
            if not vals:
                raise ValueError
            return tuple(vals)
        if key in _INT_KEYS:
            return int(raw)
        if key in _STR_KEYS:
            if not raw and key != "output_dir":
                raise ValueError
            return raw
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{path}: cannot parse {raw!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"{path}: must be finite")
    return val


def _take_variant(section, values, selector, table, label):
    kind = values.pop(selector, None)
    if kind is None:
        raise ConfigError(f"{section}.{selector}: missing required key")
    if kind not in table:
        raise ConfigError(f"{section}.{selector}: unknown {label} {kind!r} (choose from {', '.join(table)})")
    req, opt = table[kind]
    out = {}
    for k in req:
        if k not in values:
            raise ConfigError(f"{section}.{k}: missing required key for {label} {kind!r}")
        out[k] = values.pop(k)
    for k, default in opt.items():
        out[k] = values.pop(k, default)
    return kind, out


def _reject_leftovers(section, values, context):
    for k in values:
        raise ConfigError(f"{section}.{k}: key not used {context}")


def _wrap(path, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration document."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    allowed = {"grid", "fluid", "force", "initial", "run"}
    for sec in cp.sections():
        if sec not in allowed:
            raise ConfigError(f"{sec}: unknown section")
    for sec in ("grid", "fluid", "initial", "run"):
        if not cp.has_section(sec):
            raise ConfigError(f"{sec}: missing section")

    def values_of(sec):
        if not cp.has_section(sec):
            return {}
        return {k: _parse_value(sec, k, v) for k, v in cp.items(sec)}

    # [grid]
    g = values_of("grid")
    if "n" not in g:
        raise ConfigError("grid.n: missing required key")
    n = g.pop("n")
    _reject_leftovers("grid", g, "in [grid] (unknown key)")
    if n < 4:
        raise ConfigError("grid.n: must be at least 4")

    # [fluid]
    fl = values_of("fluid")
    for k in fl:
        if k not in {"gamma", "A", "viscosity", "mu_lower"} | {
            key for req, opt in _VISCOSITY_KEYS.values() for key in (*req, *opt)
        }:
            raise ConfigError(f"fluid.{k}: unknown key")
    if "gamma" not in fl:
        raise ConfigError("fluid.gamma: missing required key")
    gamma = fl.pop("gamma")
    if not gamma > 1:
        raise ConfigError("fluid.gamma: gamma must exceed 1")
    A = fl.pop("A", 1.0)
    if not A > 0:
        raise ConfigError("fluid.A: must be positive")
    mu_lower = fl.pop("mu_lower", None)
    if "viscosity" not in fl:
        fl["viscosity"] = "constant"
        fl.setdefault("mu0", 1.0)
    vkind, vk = _take_variant("fluid", fl, "viscosity", _VISCOSITY_KEYS, "viscosity law")
    _reject_leftovers("fluid", fl, f"by viscosity law {vkind!r}")
    ctor = {
        "constant": lambda: ViscosityLaw.constant(vk["mu0"], mu_lower),
        "affine": lambda: ViscosityLaw.affine(vk["mu_bar"], vk["slope"], mu_lower),
        "power": lambda: ViscosityLaw.power(vk["mu_bar"], vk["coeff"], vk["theta"], mu_lower),
        "table": lambda: ViscosityLaw.table(vk["table_rho"], vk["table_mu"], mu_lower),
    }[vkind]
    law = _wrap("fluid.viscosity", ctor)
    fluid = FluidParams(gamma=gamma, A=A, viscosity=law)

    # [force]
    fo = values_of("force")
    if not fo:
        force = ForceField.zero()
    else:
        for k in fo:
            if k != "kind" and k not in {key for req, opt in _FORCE_KEYS.values() for key in (*req, *opt)}:
                raise ConfigError(f"force.{k}: unknown key")
        fkind, fk = _take_variant("force", fo, "kind", _FORCE_KEYS, "force")
        _reject_leftovers("force", fo, f"by force {fkind!r}")
        ctor = {
            "zero": ForceField.zero,
            "constant": lambda: ForceField.constant(fk["value"]),
            "poly": lambda: ForceField.polynomial(fk["coefficients"]),
            "sin": lambda: ForceField.sinusoid(fk["amplitude"], fk["frequency"], fk["phase"]),
            "table": lambda: ForceField.table(fk["x"], fk["values"]),
        }[fkind]
        force = _wrap("force.kind", ctor)

    # [initial]
    ini = values_of("initial")
    known = {"rho0", "u0", "normalize_mass"}
    known |= {k for req, opt in _RHO0_KEYS.values() for k in (*req, *opt)}
    known |= {k for req, opt in _U0_KEYS.values() for k in (*req, *opt)}
    for k in ini:
        if k not in known:
            raise ConfigError(f"initial.{k}: unknown key")
    normalize = ini.pop("normalize_mass", True)
    rkind, rk = _take_variant("initial", ini, "rho0", _RHO0_KEYS, "rho0 profile")
    ini.setdefault("u0", "zero")
    ukind, uk = _take_variant("initial", ini, "u0", _U0_KEYS, "u0 profile")
    _reject_leftovers("initial", ini, f"by rho0={rkind!r}, u0={ukind!r}")
    rho0 = FieldSpec(rkind, tuple(rk[k] for k in FieldSpec(rkind).keys("rho0")))
    u0 = FieldSpec(ukind, tuple(uk[k] for k in FieldSpec(ukind).keys("u0")))
    for spec, name in ((rho0, "rho0"), (u0, "u0")):
        if spec.kind == "table":
            xs, ys = spec.params
            if len(xs) != len(ys) or len(xs) < 2:
                raise ConfigError(f"initial.{name}_values: table needs matching x/values of length >= 2")
    if u0.kind == "sin" and u0.params[1] < 1:
        raise ConfigError("initial.u0_mode: must be a positive integer")

    # [run]
    rn = values_of("run")
    known_run = {"t_end", "sample_every", "output_dir", "fit_window"} | set(_RUN_DEFAULTS)
    for k in rn:
        if k not in known_run:
            raise ConfigError(f"run.{k}: unknown key")
    for k in ("t_end", "sample_every"):
        if k not in rn:
            raise ConfigError(f"run.{k}: missing required key")
    opts = {**_RUN_DEFAULTS, **rn}
    if opts["t_end"] < 0:
        raise ConfigError("run.t_end: must be nonnegative")
    for k in ("sample_every", "cfl", "dt_max", "stationary_tol"):
        if not opts[k] > 0:
            raise ConfigError(f"run.{k}: must be positive")
    if opts["cfl"] > 1:
        raise ConfigError("run.cfl: must not exceed 1")
    if opts["vacuum_floor"] < 0:
        raise ConfigError("run.vacuum_floor: must be nonnegative")
    window = opts.get("fit_window")
    if window is not None and (len(window) != 2 or not window[0] < window[1]):
        raise ConfigError("run.fit_window: need two increasing times 't0, t1'")
    scenario = opts["scenario"]
    return RunConfig(
        n=n,
        fluid=fluid,
        force=force,
        rho0=rho0,
        u0=u0,
        normalize_mass=normalize,
        t_end=opts["t_end"],
        sample_every=opts["sample_every"],
        cfl=opts["cfl"],
        dt_max=opts["dt_max"],
        vacuum_floor=opts["vacuum_floor"],
        scenario=scenario,
        output_dir=opts.get("output_dir", f"out/{scenario}"),
        stationary_tol=opts["stationary_tol"],
        fit_window=window,
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config`."""
    law = cfg.fluid.viscosity
    fluid = {"gamma": cfg.fluid.gamma, "A": cfg.fluid.A, "viscosity": law.kind}
    fluid.update(zip(_VISCOSITY_KEYS[law.kind][0], law.params))
    fluid["mu_lower"] = law.mu_lower

    force = {"kind": cfg.force.kind}
    fkeys = list(_FORCE_KEYS[cfg.force.kind][0]) + list(_FORCE_KEYS[cfg.force.kind][1])
    if cfg.force.kind == "poly":
        force["coefficients"] = cfg.force.params
    else:
        force.update(zip(fkeys, cfg.force.params))

    initial = {"rho0": cfg.rho0.kind, "u0": cfg.u0.kind, "normalize_mass": cfg.normalize_mass}
    initial.update(zip(cfg.rho0.keys("rho0"), cfg.rho0.params))
    initial.update(zip(cfg.u0.keys("u0"), cfg.u0.params))

    run = {
        "scenario": cfg.scenario,
        "t_end": cfg.t_end,
        "sample_every": cfg.sample_every,
        "cfl": cfg.cfl,
        "dt_max": cfg.dt_max,
        "vacuum_floor": cfg.vacuum_floor,
        "stationary_tol": cfg.stationary_tol,
        "output_dir": cfg.output_dir,
    }
    if cfg.fit_window is not None:
        run["fit_window"] = tuple(cfg.fit_window)

    out = []
    for name, sec in (
        ("grid", {"n": cfg.n}),
        ("fluid", fluid),
        ("force", force),
        ("initial", initial),
        ("run", run),
    ):
        out.append(f"[{name}]")
        out += [f"{k} = {_fmt(v)}" for k, v in sec.items()]
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# presets and initial data


PRESETS = ("relax", "vacuum-blowup", "control", "vacuum-interior", "vacuum-patch", "smooth", "persist")


def preset_text(name: str) -> str:
    return resources.files("barotropic1d.presets").joinpath(f"{name}.ini").read_text()


def load_config(path_or_preset: str) -> RunConfig:
    """Read a config file, falling back to a packaged preset of that name."""
    p = Path(path_or_preset)
    if p.is_file():
        return parse_config(p.read_text())
    if path_or_preset in PRESETS:
        return parse_config(preset_text(path_or_preset))
    raise ConfigError(f"no config file or preset named {path_or_preset!r}")


def _profile(spec: FieldSpec, stationary=None, is_velocity=False):
    kind, p = spec.kind, spec.params
    if kind == "zero":
        return lambda x: np.zeros_like(x)
    if kind == "constant":
        return lambda x: np.full_like(x, p[0])
    if kind == "poly":
        return lambda x: np.polynomial.polynomial.polyval(x, p[0])
    if kind == "table":
        return lambda x: np.interp(x, p[0], p[1])
    if kind == "sin" and is_velocity:
        amp, mode = p
        return lambda x: amp * np.sin(np.pi * mode * x)
    if kind == "sin":
        mean, amp, freq, phase = p
        return lambda x: mean + amp * np.sin(2 * np.pi * freq * x + phase)
    if kind == "stationary":
        if stationary is None:
            raise ConfigError("initial.rho0: 'stationary' needs a feasible stationary problem")
        amp, freq, phase = p
        return lambda x: stationary(x) + amp * np.sin(2 * np.pi * freq * x + phase)
    raise ConfigError(f"unsupported profile kind {kind!r}")


def initial_data(cfg: RunConfig, stationary=None) -> InitialData:
    return InitialData(
        rho0=_profile(cfg.rho0, stationary),
        u0=_profile(cfg.u0, is_velocity=True),
        normalize_mass=cfg.normalize_mass,
    )

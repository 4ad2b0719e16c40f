"""Constitutive laws: pressure, density-dependent viscosity and external force.

Everything here is a pure function of immutable inputs. Scalars and numpy
arrays are both accepted wherever a density or a coordinate is expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VISCOSITY_KINDS = ("constant", "affine", "power", "table")
FORCE_KINDS = ("zero", "constant", "poly", "sin", "table")

# density samples used to certify tabulated viscosity laws
_TABLE_CHECK_POINTS = 10_000


class DomainError(ValueError):
    """Argument outside the domain where a law is defined."""


def _nonneg(rho, what="rho"):
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{what} must be nonnegative, got min {np.nanmin(arr)!r}")
    return arr


def _unit_interval(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
        raise DomainError("x must lie in [0, 1]")
    return arr


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _as_table(xs, ys, name):
    xs = tuple(float(v) for v in xs)
    ys = tuple(float(v) for v in ys)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError(f"{name}: need at least two (x, value) pairs of equal length")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError(f"{name}: abscissae must be strictly increasing")
    if not all(math.isfinite(v) for v in xs + ys):
        raise ValueError(f"{name}: table entries must be finite")
    return xs, ys


@dataclass(frozen=True)
class ViscosityLaw:
    """Viscosity coefficient mu(rho), bounded below by ``mu_lower > 0``.

    Use the constructors :meth:`constant`, :meth:`affine`, :meth:`power` and
    :meth:`table`. The lower bound is certified when the law is built, so a
    law that exists is a law that can be evaluated anywhere on ``rho >= 0``.
    """

    kind: str
    params: tuple
    mu_lower: float

    def __post_init__(self):
        if self.kind not in VISCOSITY_KINDS:
            raise ValueError(f"unknown viscosity kind {self.kind!r}")
        if not (self.mu_lower > 0 and math.isfinite(self.mu_lower)):
            raise ValueError("mu_lower must be a positive finite number")
        inf = self._infimum()
        if inf < self.mu_lower:
            raise ValueError(
                f"{self.kind} viscosity dips to {inf!r} below mu_lower={self.mu_lower!r}"
            )

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, mu0, mu_lower=None):
        return cls("constant", (float(mu0),), _default_lower(mu0, mu_lower))

    @classmethod
    def affine(cls, mu_bar, slope, mu_lower=None):
        if slope < 0:
            raise ValueError("affine viscosity needs slope >= 0 to stay bounded below")
        return cls("affine", (float(mu_bar), float(slope)), _default_lower(mu_bar, mu_lower))

    @classmethod
    def power(cls, mu_bar, coeff, theta, mu_lower=None):
        if coeff < 0:
            raise ValueError("power viscosity needs coeff >= 0")
        if theta <= 0:
            raise ValueError("power viscosity needs theta > 0 (continuity at vacuum)")
        return cls(
            "power", (float(mu_bar), float(coeff), float(theta)), _default_lower(mu_bar, mu_lower)
        )

    @classmethod
    def table(cls, rho_points, mu_values, mu_lower=None):
        xs, ys = _as_table(rho_points, mu_values, "viscosity table")
        if xs[0] < 0:
            raise ValueError("viscosity table abscissae must be nonnegative")
        return cls("table", (xs, ys), _default_lower(min(ys), mu_lower))

    # -----------------------------------------------------------------------
    def _infimum(self):
        # Closed forms: the infimum over rho >= 0 is attained at rho = 0.
        if self.kind in ("constant", "affine", "power"):
            return self.params[0]
        xs, ys = self.params
        # Piecewise-linear with flat ends: the minimum sits at a node, but the
        # dense sweep is kept as an independent check of the evaluator.
        grid = np.linspace(0.0, 10.0 * max(xs[-1], 1e-12), _TABLE_CHECK_POINTS)
        return min(min(ys), float(np.min(self(grid))))

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind == "constant":
            out = np.full_like(rho, self.params[0])
        elif self.kind == "affine":
            mu_bar, slope = self.params
            out = mu_bar + slope * rho
        elif self.kind == "power":
            mu_bar, coeff, theta = self.params
            out = mu_bar + coeff * rho**theta
        else:
            xs, ys = self.params
            out = np.interp(rho, xs, ys)
        return out if out.ndim else float(out)


def _default_lower(candidate, mu_lower):
    return float(candidate) if mu_lower is None else float(mu_lower)


@dataclass(frozen=True)
class FluidParams:
    """Barotropic fluid: pressure ``A * rho**gamma`` and a viscosity law."""

    gamma: float
    A: float = 1.0
    viscosity: ViscosityLaw = field(default_factory=lambda: ViscosityLaw.constant(1.0))

    def __post_init__(self):
        if not (self.gamma > 1 and math.isfinite(self.gamma)):
            raise ValueError("gamma must exceed 1")
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ValueError("A must be positive")

    @property
    def mu_lower(self):
        return self.viscosity.mu_lower


def pressure(rho, params: FluidParams):
    """``A * rho**gamma``; zero at vacuum."""
    r = _nonneg(rho)
    return _scalar_or_array(params.A * r**params.gamma, rho)


def pressure_derivative(rho, params: FluidParams):
    """``A * gamma * rho**(gamma - 1)``."""
    r = _nonneg(rho)
    return _scalar_or_array(params.A * params.gamma * r ** (params.gamma - 1.0), rho)


def sound_speed(rho, params: FluidParams):
    """sqrt(P'(rho)), used only for the CFL restriction."""
    return _scalar_or_array(np.sqrt(pressure_derivative(rho, params)), rho)


def viscosity(rho, law: ViscosityLaw):
    """mu(rho); never below ``law.mu_lower`` (certified at construction)."""
    r = _nonneg(rho)
    return _scalar_or_array(law(r), rho)


@dataclass(frozen=True)
class ForceField:
    """Time-independent external force f(x) on [0, 1].

    ``sin`` means ``amplitude * sin(2*pi*frequency*x + phase)``; ``poly`` takes
    coefficients in increasing degree; ``table`` is piecewise linear with flat
    extension past its end points.
    """

    kind: str = "zero"
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in FORCE_KINDS:
            raise ValueError(f"unknown force kind {self.kind!r}")

    @classmethod
    def zero(cls):
        return cls("zero", ())

    @classmethod
    def constant(cls, value):
        return cls("constant", (float(value),))

    @classmethod
    def polynomial(cls, coefficients):
        coeffs = tuple(float(c) for c in coefficients)
        if not coeffs:
            raise ValueError("polynomial force needs at least one coefficient")
        return cls("poly", coeffs)

    @classmethod
    def sinusoid(cls, amplitude, frequency, phase=0.0):
        return cls("sin", (float(amplitude), float(frequency), float(phase)))

    @classmethod
    def table(cls, x_points, values):
        return cls("table", _as_table(x_points, values, "force table"))

    def __call__(self, x):
        return force_eval(self, x)

    def primitive(self, x):
        return force_primitive(self, x)

    def sup_norm(self):
        """||f||_inf on [0, 1] (exact for tables, dense sampling otherwise)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.params[0])
        if self.kind == "table":
            return max(abs(v) for v in self.params[1])
        if self.kind == "sin":
            return abs(self.params[0]) if self.params[1] != 0 else abs(
                self.params[0] * math.sin(self.params[2])
            )
        return float(np.max(np.abs(_force_values(self, np.linspace(0.0, 1.0, 10_001)))))

    def h1_norm(self):
        """||f||_{H^1}; every admissible variant is H^1 on [0, 1]."""
        x = np.linspace(0.0, 1.0, 20_001)
        f = _force_values(self, x)
        df = np.gradient(f, x)
        from scipy.integrate import simpson

        return math.sqrt(simpson(f**2, x=x) + simpson(df**2, x=x))


def _force_values(force, x):
    kind, p = force.kind, force.params
    if kind == "zero":
        return np.zeros_like(x)
    if kind == "constant":
        return np.full_like(x, p[0])
    if kind == "poly":
        return np.polynomial.polynomial.polyval(x, p)
    if kind == "sin":
        amp, freq, phase = p
        return amp * np.sin(2.0 * np.pi * freq * x + phase)
    xs, ys = p
    return np.interp(x, xs, ys)


def _table_primitive(xs, ys, x):
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    # exact integral of the flat-extended piecewise-linear interpolant
    node_F = np.concatenate(
        ([ys[0] * xs[0]], ys[0] * xs[0] + np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))
    )
    out = np.empty_like(x)
    left = x <= xs[0]
    right = x >= xs[-1]
    mid = ~(left | right)
    out[left] = ys[0] * x[left]
    out[right] = node_F[-1] + ys[-1] * (x[right] - xs[-1])
    if np.any(mid):
        k = np.searchsorted(xs, x[mid], side="right") - 1
        h = x[mid] - xs[k]
        slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
        out[mid] = node_F[k] + ys[k] * h + 0.5 * slope * h**2
    return out


def force_eval(force: ForceField, x):
    """f(x) for x in [0, 1]."""
    xa = _unit_interval(x)
    return _scalar_or_array(_force_values(force, xa), x)


def force_primitive(force: ForceField, x):
    """F(x) = integral of f over [0, x], in closed form for every variant."""
    xa = _unit_interval(x)
    kind, p = force.kind, force.params
    if kind == "zero":
        out = np.zeros_like(xa)
    elif kind == "constant":
        out = p[0] * xa
    elif kind == "poly":
        integ = np.polynomial.polynomial.polyint(p)
        out = np.polynomial.polynomial.polyval(xa, integ)
    elif kind == "sin":
        amp, freq, phase = p
        if freq == 0:
            out = amp * math.sin(phase) * xa
        else:
            w = 2.0 * np.pi * freq
            out = amp / w * (math.cos(phase) - np.cos(w * xa + phase))
    else:
        out = _table_primitive(*p, np.atleast_1d(xa)).reshape(xa.shape)
    return _scalar_or_array(out, x)

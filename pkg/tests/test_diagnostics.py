import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barotropic1d.config import load_config
from barotropic1d.diagnostics import (
    RECORD_COLUMNS,
    DiagnosticRecord,
    FitInfeasible,
    deviation_norms,
    dissipation,
    energy,
    entropy_bounds,
    entropy_sandwich_violations,
    fit_decay,
    g_potential,
    lyapunov,
    record,
    records_to_columns,
)
from barotropic1d.grid import Grid, integrate, lp_norm
from barotropic1d.model import FluidParams, ForceField, ViscosityLaw, pressure_derivative
from barotropic1d.scenarios import prepare
from barotropic1d.solver import State, run
from barotropic1d.stationary import solve_stationary


@pytest.fixture(scope="module")
def affine():
    g = Grid(200)
    params = FluidParams(2.0)
    return g, params, solve_stationary(ForceField.constant(1.0), params, 1.0, g)


def test_energy_examples():
    g = Grid(100)
    rest = State(0.0, np.ones(100), np.zeros(101))
    assert energy(rest, FluidParams(2.0), ForceField.zero(), g) == pytest.approx(1.0)
    assert energy(State(0.0, np.zeros(100), np.zeros(101)), FluidParams(2.0), ForceField.zero(), g) == 0.0
    assert energy(rest, FluidParams(2.0), ForceField.constant(1.0), g) == pytest.approx(0.5)


def test_dissipation_examples():
    g = Grid(200)
    p = FluidParams(2.0)
    assert dissipation(State(0.0, np.ones(200), np.zeros(201)), p, g) == 0.0
    s = State(0.0, np.ones(200), np.sin(np.pi * g.faces))
    q = dissipation(s, p, g)
    assert q == pytest.approx(math.pi**2 / 2, rel=0.01)
    p15 = FluidParams(2.0, viscosity=ViscosityLaw.power(0.5, 1.0, 1.0))
    assert dissipation(s, p15, g) == pytest.approx(1.5 * q, rel=1e-14)


def test_g_potential_examples():
    p2 = FluidParams(2.0)
    assert g_potential(1.3, 1.3, p2) == 0.0
    r = np.linspace(0, 3, 31)
    np.testing.assert_allclose(g_potential(r, 0.8, p2), (r - 0.8) ** 2, atol=1e-14)
    assert g_potential(0.0, 1.0, FluidParams(1.4)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        g_potential(1.0, 0.0, p2)


def test_lyapunov_examples(affine):
    g, params, s = affine
    assert lyapunov(State(0.0, s.profile, np.zeros(201)), s, params, g) == 0.0
    rho = s.profile + 0.1 * np.sin(2 * np.pi * g.centers)
    u = 0.2 * np.sin(np.pi * g.faces)
    state = State(0.0, rho, u)
    uc = 0.5 * (u[1:] + u[:-1])
    expected = 0.5 * integrate(rho * uc**2, g) + lp_norm(rho - s.profile, 2, g) ** 2
    assert lyapunov(state, s, params, g) == pytest.approx(expected, rel=1e-12)


def test_deviation_norms(affine):
    g, _, s = affine
    assert deviation_norms(State(0.0, s.profile, np.zeros(201)), s, 2, g) == (0.0, 0.0)
    d, _ = deviation_norms(State(0.0, s.profile + 0.3, np.zeros(201)), s, 2, g)
    assert d == pytest.approx(0.3)
    d, _ = deviation_norms(State(0.0, s.profile + 0.1 * np.sin(2 * np.pi * g.centers), np.zeros(201)), s, 2, g)
    assert d == pytest.approx(0.1 / math.sqrt(2), rel=0.01)


def test_fit_examples():
    t = np.linspace(0, 5, 100)
    f = fit_decay(t, np.exp(-2 * t))
    assert abs(f.alpha - 2) < 1e-10 and abs(f.r_squared - 1) < 1e-10
    f = fit_decay(t, np.full(100, 4.2))
    assert f.alpha == 0.0 and f.r_squared == 1.0
    t = np.linspace(0, 20, 200)
    f = fit_decay(t, 3 * np.exp(-0.7 * t) * (1 + 0.01 * np.sin(t)))
    assert 0.68 <= f.alpha <= 0.72 and f.r_squared > 0.99


def test_fit_drops_nonpositive_and_needs_ten_samples():
    t = np.arange(20.0)
    v = np.exp(-t)
    v[::2] = 0.0
    assert fit_decay(t, v).alpha == pytest.approx(1.0)
    v[1::4] = -1.0
    with pytest.raises(FitInfeasible):
        fit_decay(t, v)
    with pytest.raises(FitInfeasible):
        fit_decay(t, np.exp(-t), window=(0, 5))


@settings(deadline=None)
@given(c=st.floats(1e-6, 1e6), alpha=st.floats(-2, 2), noise=st.integers(0, 2**31))
def test_fit_is_shift_equivariant(c, alpha, noise):
    rng = np.random.default_rng(noise)
    t = np.linspace(0, 10, 40)
    v = np.exp(-alpha * t + 0.1 * rng.normal(size=40))
    a, b = fit_decay(t, v), fit_decay(t, c * v)
    assert b.alpha == pytest.approx(a.alpha, abs=1e-12)
    assert b.r_squared == pytest.approx(a.r_squared, abs=1e-12)
    assert b.intercept == pytest.approx(a.intercept + math.log(c), abs=1e-9)


def _oracle_bounds(lo, hi, params):
    """Extremes of P'(xi) / (2 xi) over a dense sample of [lo, hi]."""
    xi = np.linspace(lo, hi, 20001)
    h = pressure_derivative(xi, params) / (2 * xi)
    return h.min(), h.max()


@settings(max_examples=100, deadline=None)
@given(
    gamma=st.floats(1.1, 3.5),
    r=st.floats(0.05, 4.0),
    s=st.floats(0.05, 4.0),
)
def test_sandwich_constants_bracket_the_pointwise_extremes(gamma, r, s):
    params = FluidParams(gamma)
    lo, hi = min(r, s), max(r, s)
    m1, m2 = entropy_bounds(lo, hi, params)
    omin, omax = _oracle_bounds(lo, hi, params)
    assert m1 <= omin * (1 + 1e-12) and m2 >= omax * (1 - 1e-12)
    g = g_potential(r, s, params)
    d2 = (r - s) ** 2
    tol = 1e-12 * (1 + r**gamma + s**gamma)
    assert omin * d2 - tol <= g <= omax * d2 + tol


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), gamma=st.floats(1.2, 3.0), vac=st.booleans())
def test_sandwich_holds_on_random_states(seed, gamma, vac):
    rng = np.random.default_rng(seed)
    g = Grid(50)
    params = FluidParams(gamma)
    s = solve_stationary(ForceField.sinusoid(1.0, 1.0), params, 1.0, g)
    rho = s.profile * rng.uniform(0.3, 2.0, 50)
    if vac:
        rho[:7] = 0.0
    assert entropy_sandwich_violations(State(0.0, rho, np.zeros(51)), s, params) == 0


def test_record_examples(affine):
    g, params, s = affine
    eq = record(State(0.0, s.profile, np.zeros(201)), params, ForceField.constant(1.0), g, s)
    assert eq.u_l2 == eq.u_w12 == eq.u_w1inf == 0.0
    assert eq.lyapunov == 0.0 and eq.mass == pytest.approx(1.0)
    vac = State(0.0, 2 * g.centers, np.zeros(201))
    r = record(vac, params, ForceField.constant(1.0), g)
    assert r.gradrho_l2 == pytest.approx(2.0, rel=0.01)
    assert r.mass == integrate(vac.rho, g)
    assert math.isnan(r.lyapunov) and math.isnan(r.dev_l2)


def test_record_csv_round_trip(affine):
    g, params, s = affine
    rec = record(State(0.5, s.profile + 0.01, np.sin(np.pi * g.faces) / 3), params, ForceField.constant(1.0), g, s)
    line = rec.to_csv_row()
    assert len(line.split(",")) == len(RECORD_COLUMNS)
    assert DiagnosticRecord.from_csv_row(line) == rec
    cols = records_to_columns([rec, rec])
    assert list(cols) == list(RECORD_COLUMNS) and cols["t"].tolist() == [0.5, 0.5]


def test_lyapunov_decreases_every_step_after_the_first():
    # the first step starts from rest with a pressure imbalance that the
    # continuity update sees before the momentum update can react
    cfg = load_config("relax").with_updates(n=100)
    state0, rho_s, _ = prepare(cfg)
    values = [lyapunov(state0, rho_s, cfg.fluid, cfg.grid)]
    run(state0, cfg.fluid, cfg.force, cfg.grid, cfg.solver_config, 2.0, 1.0,
        on_step=lambda old, new, dt: values.append(lyapunov(new, rho_s, cfg.fluid, cfg.grid)))
    d = np.diff(values)
    assert np.all(d[1:] <= 1e-8 * values[0])
    assert values[-1] < values[0]

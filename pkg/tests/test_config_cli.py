import math
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barotropic1d.cli import main
from barotropic1d.config import (
    PRESETS,
    ConfigError,
    FieldSpec,
    RunConfig,
    load_config,
    parse_config,
    preset_text,
    serialize_config,
)
from barotropic1d.model import FluidParams, ForceField, ViscosityLaw
from barotropic1d.scenarios import convergence_study, read_records, run_scenario

MINIMAL = textwrap.dedent(
    """
    [grid]
    n = 32
    [fluid]
    gamma = 2.0
    [initial]
    rho0 = constant
    rho0_value = 1.0
    [run]
    t_end = 0.2
    sample_every = 0.1
    """
)


def test_minimal_document_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.n == 32 and cfg.fluid.gamma == 2.0 and cfg.fluid.A == 1.0
    assert cfg.force.kind == "zero" and cfg.u0.kind == "zero"
    assert cfg.cfl == 0.4 and cfg.dt_max == 1e-2 and cfg.normalize_mass


@pytest.mark.parametrize(
    "old, new, match",
    [
        ("gamma = 2.0", "gamma = 1.0", "fluid.gamma: gamma must exceed 1"),
        ("gamma = 2.0", "gamma = 2.0\ngama = 2.0", "gama"),
        ("n = 32", "n = 3", "grid.n"),
        ("n = 32", "n = many", "grid.n"),
        ("t_end = 0.2", "t_end = -1", "run.t_end"),
        ("rho0_value = 1.0", "", "initial.rho0_value"),
        ("rho0 = constant", "rho0 = wavy", "initial.rho0"),
    ],
)
def test_parse_errors_name_the_key(old, new, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(MINIMAL.replace(old, new))


def test_unused_key_for_variant_is_rejected():
    with pytest.raises(ConfigError, match="rho0_amplitude"):
        parse_config(MINIMAL.replace("rho0_value = 1.0", "rho0_value = 1.0\nrho0_amplitude = 0.1"))


@pytest.mark.parametrize("name", PRESETS)
def test_presets_round_trip(name):
    cfg = load_config(name)
    assert cfg.scenario == name
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)
    assert parse_config(preset_text(name)) == cfg


pos = st.floats(0.1, 10.0)
laws = st.one_of(
    st.builds(ViscosityLaw.constant, pos),
    st.builds(ViscosityLaw.affine, pos, st.floats(0, 10)),
    st.builds(ViscosityLaw.power, pos, st.floats(0, 10), pos),
    st.lists(pos, min_size=2, max_size=4).map(lambda ys: ViscosityLaw.table(list(np.linspace(0, 2, len(ys))), ys)),
)
forces = st.one_of(
    st.just(ForceField.zero()),
    st.builds(ForceField.constant, st.floats(-5, 5)),
    st.builds(ForceField.sinusoid, st.floats(-5, 5), st.floats(0, 4), st.floats(0, 6)),
    st.lists(st.floats(-5, 5), min_size=1, max_size=4).map(ForceField.polynomial),
)
rho0s = st.one_of(
    st.builds(lambda v: FieldSpec("constant", (v,)), pos),
    st.builds(lambda a, f, p: FieldSpec("stationary", (a, f, p)), st.floats(0, 0.5), st.floats(0, 3), st.floats(0, 6)),
    st.builds(lambda m, a, f, p: FieldSpec("sin", (m, a, f, p)), pos, st.floats(0, 0.1), st.floats(0, 3), st.floats(0, 6)),
)
u0s = st.one_of(
    st.just(FieldSpec("zero")),
    st.builds(lambda a, m: FieldSpec("sin", (a, m)), st.floats(-2, 2), st.integers(1, 5)),
)


@st.composite
def configs(draw):
    return RunConfig(
        n=draw(st.integers(4, 4096)),
        fluid=FluidParams(draw(st.floats(1.01, 4.0)), draw(pos), draw(laws)),
        force=draw(forces),
        rho0=draw(rho0s),
        u0=draw(u0s),
        normalize_mass=draw(st.booleans()),
        t_end=draw(st.floats(0, 100)),
        sample_every=draw(st.floats(0.01, 10)),
        cfl=draw(st.floats(0.05, 1.0)),
        dt_max=draw(st.floats(1e-5, 1.0)),
        scenario=draw(st.sampled_from(["custom", "relax", "my-run"])),
        fit_window=draw(st.one_of(st.none(), st.tuples(st.floats(0, 5), st.floats(5, 50)))),
    )


@settings(max_examples=100, deadline=None)
@given(configs())
def test_parse_serialize_parse_is_identity(cfg):
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    assert serialize_config(parse_config(text)) == text


def test_load_config_unknown():
    with pytest.raises(ConfigError):
        load_config("no-such-preset")


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_run_writes_all_files(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL.replace("[run]", "[run]\nscenario = mini"))
    out = tmp_path / "out"
    assert main(["run", cfg, "-o", str(out)]) == 0
    for f in ("config.ini", "diagnostics.csv", "stationary.csv", "final_state.csv", "summary.txt"):
        assert (out / f).is_file()
    text = (out / "diagnostics.csv").read_text()
    assert text.startswith("# scenario: mini\n# config_hash: ")
    assert len(read_records(out / "diagnostics.csv")) == 3


def test_cli_t_end_zero_gives_one_row(tmp_path):
    cfg = _write(tmp_path, MINIMAL.replace("t_end = 0.2", "t_end = 0.0"))
    assert main(["run", cfg, "-o", str(tmp_path / "o")]) == 0
    assert len(read_records(tmp_path / "o" / "diagnostics.csv")) == 1


def test_runs_are_byte_identical(tmp_path):
    text = preset_text("smooth").replace("t_end = 0.5", "t_end = 0.1")
    cfg = _write(tmp_path, text)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "-o", str(a)]) == 0
    assert main(["run", cfg, "-o", str(b)]) == 0
    for f in ("diagnostics.csv", "final_state.csv", "stationary.csv", "summary.txt", "config.ini"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_cli_config_errors(tmp_path, capsys):
    assert main(["run", _write(tmp_path, MINIMAL.replace("gamma = 2.0", "gamma = 1.0"))]) == 2
    assert "gamma must exceed 1" in capsys.readouterr().err
    assert main(["run", "definitely-not-a-preset"]) == 2


def test_cli_stationary(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["stationary", "relax", "-o", str(out)]) == 0
    body = (out / "stationary.csv").read_text()
    assert "# kappa: " in body and "\nx,rho_s\n" in body
    kappa = float(capsys.readouterr().out.split("kappa = ")[1].split()[0])
    assert kappa == pytest.approx(0.75, abs=1e-10)


def test_cli_stationary_infeasible(tmp_path, capsys):
    text = MINIMAL.replace("[initial]", "[force]\nkind = constant\nvalue = 10.0\n[initial]")
    assert main(["stationary", _write(tmp_path, text), "-o", str(tmp_path / "s")]) == 4
    assert "lhs=" in capsys.readouterr().err


def test_run_proceeds_when_stationary_is_infeasible(tmp_path):
    text = MINIMAL.replace("[initial]", "[force]\nkind = constant\nvalue = 10.0\n[initial]")
    assert main(["run", _write(tmp_path, text), "-o", str(tmp_path / "r")]) == 0
    summary = (tmp_path / "r" / "summary.txt").read_text()
    assert "existence condition violated, lhs=" in summary
    assert not (tmp_path / "r" / "stationary.csv").exists()
    assert math.isnan(read_records(tmp_path / "r" / "diagnostics.csv")[0].dev_l2)


def test_cli_check_condition(capsys):
    assert main(["check-condition", "relax"]) == 0
    out = capsys.readouterr().out
    assert "lhs = 0.25" in out and "holds = True" in out
    assert "force_sup = 1.0" in out and "force_h1 = 1.0" in out


def test_cli_compat(tmp_path, capsys):
    text = MINIMAL.replace("n = 32", "n = 200").replace(
        "rho0_value = 1.0", "rho0_value = 1.0\nu0 = sin\nu0_amplitude = 1.0"
    )
    assert main(["compat", _write(tmp_path, text)]) == 0
    out = capsys.readouterr().out
    value = float(out.split("residual = ")[1].split()[0])
    assert value == pytest.approx(math.pi**2 / math.sqrt(2), rel=0.02)


def test_summary_written_on_abort(tmp_path):
    # an enormous step breaks the CFL bound and makes the density negative
    cfg = parse_config(
        MINIMAL.replace("[run]", "[run]\ncfl = 1.0\ndt_max = 1.0").replace(
            "rho0_value = 1.0", "rho0_value = 1.0\nu0 = sin\nu0_amplitude = 200.0"
        )
    )
    res = run_scenario(cfg, tmp_path / "x")
    summary = (tmp_path / "x" / "summary.txt").read_text()
    if res.status == 3:
        assert "status = aborted" in summary and "reason = " in summary
    else:
        assert res.status == 0 and "status = ok" in summary


def test_summary_written_on_bad_initial_data(tmp_path):
    cfg = parse_config(MINIMAL.replace("rho0 = constant\nrho0_value = 1.0", "rho0 = poly\nrho0_coefficients = 0.5, -1.0"))
    res = run_scenario(cfg, tmp_path / "x")
    assert res.status == 2
    assert "negative" in (tmp_path / "x" / "summary.txt").read_text()


def test_convergence_errors(tmp_path, capsys):
    cfg = load_config("smooth")
    with pytest.raises(ValueError):
        convergence_study(cfg, [50, 50, 50], write=False)
    with pytest.raises(ValueError):
        convergence_study(cfg, [50, 100], write=False)
    assert main(["converge", "smooth", "--resolutions", "50,50,50", "-o", str(tmp_path)]) == 2


def test_cli_converge_writes_table(tmp_path, capsys):
    text = preset_text("smooth").replace("t_end = 0.5", "t_end = 0.05")
    assert main(["converge", _write(tmp_path, text), "--resolutions", "16,32,64", "-o", str(tmp_path / "c")]) == 0
    lines = (tmp_path / "c" / "convergence.csv").read_text().splitlines()
    k = lines.index("n,error,order")
    # the finest grid only serves as the reference for its neighbour
    assert [row.split(",")[0] for row in lines[k + 1:]] == ["16", "32"]


def test_inline_comments_are_ignored():
    cfg = parse_config(MINIMAL.replace("gamma = 2.0", "gamma = 2.0   ; adiabatic exponent"))
    assert cfg.fluid.gamma == 2.0

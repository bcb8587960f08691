"""Command-line interface: exit codes, config loading, output files."""

import io
from pathlib import Path

import pytest

from divstab import harness
from divstab.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    load_scenario,
    load_sweep_options,
    main,
)
from divstab.harness import (
    DEFAULT_GAINS,
    DEFAULT_HEIGHTS,
    DEFAULT_HOVER_WINDS,
    DEFAULT_WINDS,
    onset_landing_scenario,
    run_scenario,
    write_trace_csv,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

FACTORY_CONFIGS = [
    ("landing_onset.toml", harness.onset_landing_scenario),
    ("detection_sweep.toml", harness.detection_base),
    ("gusty_sweep.toml", harness.gusty_base),
    ("hover_grid.toml", harness.hover_base),
    ("edge_landing.toml", harness.edge_base),
]


# --------------------------------------------------------------- configs


@pytest.mark.parametrize(
    "name,factory", FACTORY_CONFIGS, ids=[c[0] for c in FACTORY_CONFIGS]
)
def test_shipped_configs_match_library_factories(name, factory):
    assert load_scenario(str(CONFIG_DIR / name)) == factory()


def test_shipped_sweep_tables_match_battery_defaults():
    det = load_sweep_options(str(CONFIG_DIR / "detection_sweep.toml"))
    assert tuple(det["gains"]) == DEFAULT_GAINS
    assert tuple(det["winds"]) == DEFAULT_WINDS
    gus = load_sweep_options(str(CONFIG_DIR / "gusty_sweep.toml"))
    assert tuple(gus["gains"]) == DEFAULT_GAINS
    assert tuple(gus["winds"]) == DEFAULT_WINDS
    hov = load_sweep_options(str(CONFIG_DIR / "hover_grid.toml"))
    assert tuple(hov["winds"]) == DEFAULT_HOVER_WINDS
    assert tuple(hov["heights"]) == DEFAULT_HEIGHTS
    edge = load_sweep_options(str(CONFIG_DIR / "edge_landing.toml"))
    assert tuple(edge["heights"]) == DEFAULT_HEIGHTS


def test_unknown_section_rejected(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[nope]\nx = 1\n")
    with pytest.raises(ConfigError, match="unknown config section"):
        load_scenario(str(bad))


def test_unknown_scenario_key_rejected(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[scenario]\nwarp = 9\n")
    with pytest.raises(ConfigError, match="unknown \\[scenario\\] key"):
        load_scenario(str(bad))


def test_unknown_sweep_key_rejected(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[sweep]\nspeeds = [1.0]\n")
    with pytest.raises(ConfigError, match="unknown \\[sweep\\] key"):
        load_sweep_options(str(bad))


def test_invalid_section_value_reports_its_section(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[controller]\ngain_p = -1.0\n")
    with pytest.raises(ConfigError, match="\\[controller\\] section"):
        load_scenario(str(bad))


# ------------------------------------------------------------ exit codes


def test_missing_config_returns_config_error(capsys):
    rc = main(["simulate", "--config", "/nonexistent/missing.toml"])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_broken_toml_returns_config_error(tmp_path, capsys):
    bad = tmp_path / "broken.toml"
    bad.write_text("not toml ][\n")
    rc = main(["simulate", "--config", str(bad)])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_unknown_flag_exits_with_config_code():
    with pytest.raises(SystemExit) as excinfo:
        main(["analyze", "--z", "1", "--bogus"])
    assert excinfo.value.code == EXIT_CONFIG


def test_out_of_regime_operating_point_is_a_numerical_failure(capsys):
    rc = main(["analyze", "--z", "0.001", "--v-z", "5", "--p", "5",
               "--T", "0.05"])
    assert rc == EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


# --------------------------------------------------------------- analyze


def test_analyze_prints_vacuum_boundary_gain(capsys):
    rc = main(["analyze", "--z", "1", "--T", "0.03"])
    assert rc == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["K_unstable = 66.67"]


def test_analyze_with_delay_adds_continuous_gains(capsys):
    rc = main(["analyze", "--z", "10", "--delay", "0.15"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out == [
        "K_unstable = 666.67",
        "k_oscillation = 24.56",
        "k_unstable_delayed = 105.51",
    ]


def test_analyze_reports_missing_crossings_as_none(capsys):
    rc = main(["analyze", "--z", "10", "--delay", "1e-6", "--beta", "0"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "k_oscillation = none" in out
    assert "k_unstable_delayed = none" in out


# ------------------------------------------------------------- simulate


def test_simulate_trace_matches_library_output(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    rc = main(["simulate", "--out", str(out)])
    assert rc == EXIT_OK
    printed = capsys.readouterr().out
    assert "records" in printed
    assert "oscillation onset: t=" in printed
    buf = io.StringIO()
    write_trace_csv(buf, run_scenario(onset_landing_scenario()))
    assert out.read_text() == buf.getvalue()


def test_sweep_detect_runs_from_config(tmp_path, capsys):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text(
        "[controller]\n"
        "gain_p = 10.0\n"
        "setpoint = -0.05\n"
        "\n"
        "[scenario]\n"
        "z0 = 20.0\n"
        "v_z0 = -1.0\n"
        "\n"
        "[sweep]\n"
        "gains = [10.0]\n"
        "winds = [0.0]\n"
    )
    samples = tmp_path / "samples.csv"
    rc = main(["sweep-detect", "--config", str(cfg),
               "--samples-out", str(samples)])
    assert rc == EXIT_OK
    assert capsys.readouterr().out.startswith("fit:")
    lines = samples.read_text().splitlines()
    assert lines[0] == "K,z"
    assert len(lines) == 2  # the single cell detected


# --------------------------------------------------------- perfect-curve


def test_perfect_curve_writes_profile(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    rc = main(["perfect-curve", "--out", str(out)])
    assert rc == EXIT_OK
    assert capsys.readouterr().out.startswith("u'(0) = 9.8100 N")
    lines = out.read_text().splitlines()
    assert lines[0] == "z,u_prime"
    assert len(lines) == 1 + 121  # default sample count
    z0_row = lines[1].split(",")
    assert float(z0_row[0]) == 0.0
    assert float(z0_row[1]) == pytest.approx(9.81)

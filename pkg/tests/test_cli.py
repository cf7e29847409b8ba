"""Tests for the batch experiment runner: config plumbing, outputs, exit codes."""

import json

import pytest

from fermifield.cli import (
    EXPERIMENTS,
    ConfigError,
    _build_A,
    _build_V,
    list_builders,
    load_config,
    main,
)
from fermifield.grid import GridSpec, VectorField

SCHEMA = {"n": ("int", 8), "box": ("float", 2.0), "h_list": ("floats", [1.0, 0.5]),
          "name": ("str", None)}


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def test_load_config_defaults_and_required():
    cfg = load_config(None, SCHEMA, {"name": "x"})
    assert cfg == {"n": 8, "box": 2.0, "h_list": [1.0, 0.5], "name": "x"}
    with pytest.raises(ConfigError, match="required"):
        load_config(None, SCHEMA, {})


def test_load_config_string_conversion():
    cfg = load_config(None, SCHEMA, {"n": "16", "box": "4.0",
                                     "h_list": "1.0, 0.5 0.25", "name": "x"})
    assert cfg["n"] == 16
    assert cfg["box"] == 4.0
    assert cfg["h_list"] == [1.0, 0.5, 0.25]


def test_load_config_rejects_unknown_and_unparsable():
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(None, SCHEMA, {"name": "x", "bogus": "1"})
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(None, SCHEMA, {"name": "x", "n": "not-a-number"})


def test_load_config_file_and_override_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("[run]\nn = 4\nbox = 8.0\nname = filecase\n")
    cfg = load_config(str(path), SCHEMA, {"n": "32"})
    assert cfg["n"] == 32          # override wins
    assert cfg["box"] == 8.0       # file value kept
    assert cfg["name"] == "filecase"
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.cfg"), SCHEMA, {})


# ---------------------------------------------------------------------------
# builder dispatch
# ---------------------------------------------------------------------------


def test_build_v_dispatch_and_errors():
    grid = GridSpec(d=1, N=16, L=2.0)
    V = _build_V("bump", [2.0, 0.5], grid)
    assert V.grid == grid
    with pytest.raises(ConfigError, match="unknown potential"):
        _build_V("nope", [], grid)
    with pytest.raises(ConfigError):
        _build_V("bump", [1.0, 2.0, 3.0, 4.0, 5.0], grid)


def test_build_a_dispatch():
    grid = GridSpec(d=3, N=8, L=2.0)
    assert isinstance(_build_A("zero", grid, 1.0, 0, []), VectorField)
    A = _build_A("randband", grid, 1.0, 0, [0.3])
    assert isinstance(A, VectorField)
    A2 = _build_A("constB", grid, 1.0, 0, [1])
    assert isinstance(A2, VectorField)
    with pytest.raises(ConfigError, match="unknown vector"):
        _build_A("nope", grid, 1.0, 0, [])


def test_list_builders_contents():
    info = list_builders()
    assert "bump" in info["potentials"]
    assert "randband" in info["vector_potentials"]
    assert set(info["experiments"]) == set(EXPERIMENTS)


# ---------------------------------------------------------------------------
# end-to-end runs and exit codes
# ---------------------------------------------------------------------------


def test_main_no_subcommand_is_usage_error(capsys):
    assert main([]) == 2


def test_main_list_builders(capsys):
    assert main(["list-builders"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "experiments" in out


def test_main_check_dyadic_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["check-dyadic", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "passed"
    assert manifest["experiment"] == "check-dyadic"
    assert "fermifield" in manifest["versions"]
    csv_lines = (out / "results.csv").read_text().strip().splitlines()
    assert csv_lines[0].startswith("quantity")
    reports = [json.loads(l) for l in
               (out / "reports.jsonl").read_text().strip().splitlines()]
    assert reports[0]["name"] == "dyadic_partition"
    assert reports[0]["passed"] is True


def test_main_harmonic_compare_with_plot(tmp_path):
    out = tmp_path / "run"
    assert main(["harmonic-compare", "--out", str(out),
                 "--set", "l_max=10"]) == 0
    dat = (out / "ratio_vs_l_R2.dat").read_text().splitlines()
    assert dat[0].startswith("#")
    assert len(dat) == 11  # header + 10 modes


def test_main_config_error_exit_2(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["check-dyadic", "--out", str(out),
                 "--set", "bogus_key=1"]) == 2
    assert "bogus_key" in capsys.readouterr().err
    assert not (out / "manifest.json").exists()


def test_main_bad_override_form_exit_2(tmp_path, capsys):
    assert main(["check-dyadic", "--out", str(tmp_path),
                 "--set", "no_equals_sign"]) == 2
    assert "key=value" in capsys.readouterr().err


def test_main_numerical_failure_exit_1(tmp_path, capsys):
    # a dyadic width below the semiclassical parameter raises inside the
    # experiment; the runner must record the failure and exit 1
    out = tmp_path / "run"
    code = main(["check-dyadic", "--out", str(out),
                 "--set", "w_width=0.01"])
    assert code == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "failed"
    assert manifest["error"]


def test_main_config_file_roundtrip(tmp_path):
    cfgfile = tmp_path / "exp.cfg"
    cfgfile.write_text("[dyadic]\nn_grid = 2000\n")
    out = tmp_path / "run"
    assert main(["check-dyadic", "--config", str(cfgfile),
                 "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["n_grid"] == "2000"

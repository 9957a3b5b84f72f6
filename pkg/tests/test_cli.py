import json
from pathlib import Path

import numpy as np
import pytest

from spindimer import cli
from spindimer.cli import parse_config, run_cli
from spindimer.errors import ConfigError, NumericalGuard
from spindimer.measures import evaluate
from spindimer.model import DimerParams
from spindimer.sweep import read_csv, read_sweep_json
from spindimer.thermal import gibbs_state_analytic

DOCS = Path(__file__).resolve().parents[1] / "docs"
POINT = ["point", "--units", "dimensionless", "--j", "1", "--delta", "1", "--d-over-j", "0.5",
         "--g1", "2", "--g2", "2", "--b", "0.2", "--t", "0.3"]


@pytest.fixture(autouse=True)
def _no_env_config(monkeypatch):
    monkeypatch.delenv(cli.CONFIG_ENV, raising=False)


def _ini(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _point(capsys, argv):
    assert run_cli(argv) == 0
    return json.loads(capsys.readouterr().out)


# oracle: the library called directly

def test_point_passes_through_library_values(capsys):
    doc = _point(capsys, POINT)
    rep = evaluate(gibbs_state_analytic(DimerParams(D=0.5, B=0.2), 0.3).rho)
    assert doc["report"]["hs_min"] == rep.hs_min
    assert doc["report"]["f_min"] == rep.f_min
    assert doc["report"]["negativity"] == rep.negativity


def test_point_json_is_readable_by_sweep_reader(capsys):
    text = json.dumps(_point(capsys, POINT))
    (row,) = read_sweep_json(text)
    assert row.status == "ok" and row.hs_min == json.loads(text)["report"]["hs_min"]


# config files

def test_empty_file_plus_full_flags(tmp_path, capsys):
    doc = _point(capsys, POINT + ["--config", _ini(tmp_path, "")])
    assert doc["params"]["b"] == 0.2


def test_both_unit_modes_rejected(tmp_path):
    path = _ini(tmp_path, "[model]\nj = 1\nj_over_kb_kelvin = 141\n")
    with pytest.raises(ConfigError):
        parse_config(path)
    assert run_cli(["point", "--t", "1", "--config", path]) == 1


def test_unknown_key_reports_line(tmp_path):
    path = _ini(tmp_path, "[model]\nj = 1\n\n# note\ncolour = blue\n")
    with pytest.raises(ConfigError, match="line 5"):
        parse_config(path)


def test_unknown_section_reports_line(tmp_path):
    with pytest.raises(ConfigError, match="line 3"):
        parse_config(_ini(tmp_path, "[model]\nj = 1\n[plot]\ndpi = 300\n"))


def test_bad_value_reports_line(tmp_path, capsys):
    path = _ini(tmp_path, "[model]\nj = 1\nb = fast\n")
    assert run_cli(["point", "--t", "1", "--config", path]) == 1
    assert "line 3" in capsys.readouterr().err


def test_malformed_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(_ini(tmp_path, "j = 1\n"))


def test_cuni_sample_config():
    cfg = parse_config(str(DOCS / "cuni.ini"))
    p = cfg.params()
    assert (p.J, p.g1, p.g2, p.units.mode) == (141.0, 2.20, 2.29, "physical")


# precedence: flags > file > defaults

@pytest.mark.parametrize("in_file, flag, expected", [
    (None, None, 0.0),
    ("0.7", None, 0.7),
    (None, "1.5", 1.5),
    ("0.7", "1.5", 1.5),
])
def test_precedence_matrix(tmp_path, capsys, in_file, flag, expected):
    text = "[sweep]\nt = 0.5\n" + (f"[model]\nb = {in_file}\n" if in_file else "")
    argv = ["point", "--config", _ini(tmp_path, text)] + (["--b", flag] if flag else [])
    assert _point(capsys, argv)["params"]["b"] == expected


def test_temperature_precedence(tmp_path, capsys):
    path = _ini(tmp_path, "[sweep]\nt = 0.5\n")
    assert _point(capsys, ["point", "--config", path])["T"] == 0.5
    assert _point(capsys, ["point", "--config", path, "--t", "2e-1"])["T"] == 0.2


def test_env_var_supplies_config(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.CONFIG_ENV, _ini(tmp_path, "[model]\nb = 0.9\n[sweep]\nt = 0.4\n"))
    doc = _point(capsys, ["point"])
    assert (doc["params"]["b"], doc["T"]) == (0.9, 0.4)
    other = _ini(tmp_path, "[sweep]\nt = 0.6\n", "other.ini")
    assert _point(capsys, ["point", "--config", other])["T"] == 0.6


def test_command_from_file(tmp_path, capsys):
    doc = _point(capsys, ["--config", _ini(tmp_path, "[run]\ncommand = point\n[sweep]\nt = 1\n")])
    assert doc["command"] == "point"


# exit codes

@pytest.mark.parametrize("argv", [["point", "--bogus"], ["launch"], [], ["point", "--units", "imperial"]])
def test_usage_errors(argv):
    assert run_cli(argv) == 64


@pytest.mark.parametrize("extra", [["--t", "0"], ["--t", "-1"], ["--b", "-0.1"], ["--t", "nan"], ["--j", "x"]])
def test_validation_errors(extra):
    assert run_cli(["point", "--t", "1"] + extra) == 1


def test_zero_field_is_legal(capsys):
    assert _point(capsys, ["point", "--b", "0", "--t", "1"])["report"]["branch"] == "x_zero"


def test_numerical_guard_exit(monkeypatch):
    def boom(*a, **k):
        raise NumericalGuard("overflow")
    monkeypatch.setattr(cli, "gibbs_state_analytic", boom)
    assert run_cli(["point", "--t", "1"]) == 2


# commands

def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert run_cli(["sweep", "--axis", "B:0:3:7", "--axis", "T:0.1:1:3", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 21 and all(r.status == "ok" for r in rows)


def test_sweep_json_flag(tmp_path):
    out = tmp_path / "s.csv"
    assert run_cli(["sweep", "--axis", "B:0:1:2", "--t", "1", "--out", str(out), "--json"]) == 0
    assert len(read_sweep_json(out.with_suffix(".json").read_text())) == 2


def test_sweep_needs_axis():
    assert run_cli(["sweep", "--t", "1"]) == 1


def test_figure_fig4_monotone_at_one_tesla(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    assert run_cli(["figure", "fig4", "--out", str(out)]) == 0
    rows = [r for r in read_csv(out) if r.axis1 == 1.0]
    hs = np.array([r.hs_min for r in rows])
    assert len(rows) == 300 and np.all(np.diff(hs) <= 0)


def test_figure_multi_spec_files(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    assert run_cli(["figure", "fig1", "--out", str(out), "--temperatures", "0.2,1"]) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["fig1_d_over_j_+1.5.csv", "fig1_d_over_j_-0.5.csv"]
    assert len(read_csv(tmp_path / files[0])) == 2 * 121


def test_figure_unknown_preset():
    assert run_cli(["figure", "fig9"]) == 1


def test_threshold_prints_crossing(capsys):
    argv = ["threshold", "--config", str(DOCS / "cuni.ini"), "--moving", "T",
            "--measure", "negativity", "--lo", "100", "--hi", "200", "--tol", "0.01"]
    assert run_cli(argv) == 0
    assert 127 <= float(capsys.readouterr().out) <= 155


def test_threshold_invalid_bracket(capsys):
    argv = ["threshold", "--moving", "B", "--measure", "hs_min", "--t", "0.1", "--lo", "5", "--hi", "6"]
    assert run_cli(argv) == 1


def test_selftest_small(capsys):
    assert run_cli(["selftest", "--draws", "20", "--grid", "60x30"]) == 0
    out = capsys.readouterr().out
    assert "20/20" in out and "FAIL" not in out


def test_selftest_failure_exit(monkeypatch, capsys):
    from spindimer.selftest import SuiteResult
    monkeypatch.setattr(cli, "run_all", lambda **k: [SuiteResult("x", 0, 1, 1.0, 1e-10)])
    assert run_cli(["selftest"]) == 2

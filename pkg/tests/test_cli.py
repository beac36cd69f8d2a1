import csv
import json
import subprocess
import sys

import pytest

from strongdamp.cli import run_cli
from strongdamp.config import ConfigError, ExperimentConfig, load_config, parse_config
from strongdamp.data import Dipole, Gaussian, GridSamples
from strongdamp.oracles import sample_datum

LEMMA21_N1 = """
dimension = 1
t_points = 13

[u1]
family = "gaussian"
amplitude = 1.0
width = 1.0
"""


@pytest.fixture
def lemma21_config(tmp_path):
    path = tmp_path / "l21.toml"
    path.write_text(LEMMA21_N1)
    return path


def test_lemma21_pass_and_outputs(tmp_path, lemma21_config, capsys):
    out_csv, out_json = tmp_path / "d.csv", tmp_path / "d.json"
    code = run_cli(["verify-lemma21", "--config", str(lemma21_config), "--csv", str(out_csv),
                    "--json", str(out_json)])
    assert code == 0
    assert "PASS" in capsys.readouterr().out
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "value", "bound", "ratio"] and len(rows) == 14
    assert all(len(r) == 4 for r in rows)
    assert out_csv.read_bytes().count(b"\r") == 0
    first = [float(v) for v in rows[1]]
    assert first[0] == 100.0 and first[3] == pytest.approx(first[1] / first[2], rel=1e-15)
    payload = json.loads(out_json.read_text())
    assert payload["command"] == "verify-lemma21" and payload["passed"] is True
    assert payload["exponent"]["exponent"] == pytest.approx(-0.5, abs=0.02)
    assert list(payload) == sorted(payload)


def test_json_is_deterministic(tmp_path, lemma21_config, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli(["verify-lemma21", "--config", str(lemma21_config), "--json", str(a)]) == 0
    monkeypatch.setenv("STRONGDAMP_THREADS", "4")
    assert run_cli(["verify-lemma21", "--config", str(lemma21_config), "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_failing_criterion_exits_one(tmp_path, capsys):
    # a fit window of [1, 2] still carries the start-up transient
    cfg = tmp_path / "short.toml"
    cfg.write_text("hf_t_max = 2.0\nr_samples = [0.6, 2.0]\n")
    code = run_cli(["hf-envelope", "--config", str(cfg)])
    captured = capsys.readouterr()
    assert code == 1 and "failed criterion: rates within 5%" in captured.err
    assert "FAIL  rates within 5%" in captured.out


def test_window_without_points_is_a_config_error(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("dimension = 2\nt_min = 1.0\nt_max = 3.0\nt_points = 6\n")
    assert run_cli(["profile-norms", "--config", str(cfg)]) == 2


def test_hf_envelope_csv_uses_r_column(tmp_path):
    out = tmp_path / "hf.csv"
    assert run_cli(["hf-envelope", "--csv", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["r", "value", "bound", "ratio"] and len(rows) == 8


def test_output_paths_from_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('samples = 300\n[output]\njson = "out.json"\n')
    assert run_cli(["identities", "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "out.json").read_text())["samples"] == 300


@pytest.mark.parametrize("argv", [[], ["bogus"], ["lemma22", "--nope"]])
def test_usage_errors_exit_two(argv):
    assert run_cli(argv) == 2


@pytest.mark.parametrize("text", [
    "dimension = 1\nspeed = 3\n",
    "delta0 = 2.5\n",
    "t_min = 10.0\nt_max = 5.0\n",
    "dimension = 1\n[u0]\nfamily = \"hexagon\"\n",
    "dimension = \"two\"\n",
    "this is not toml",
])
def test_config_errors_exit_two(tmp_path, text, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(text)
    assert run_cli(["lemma22", "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exits_two(tmp_path):
    assert run_cli(["lemma22", "--config", str(tmp_path / "absent.toml")]) == 2


def test_wrong_data_family_for_theorem_exits_two(tmp_path):
    cfg = tmp_path / "bump.toml"
    cfg.write_text('dimension = 1\n[u1]\nfamily = "bump"\n')
    assert run_cli(["verify-theorem11", "--config", str(cfg)]) == 2


def test_parse_config_values(tmp_path):
    cfg = parse_config({
        "dimension": 2, "delta0": 0.4, "t_points": 9, "r_samples": [0.5, 1.0],
        "u0": {"family": "dipole", "amplitude": 2.0, "width": 0.5, "separation": [1.0, 0.0]},
        "grid": {"enabled": True, "box": 64, "N": 256, "t": 10},
    }, tmp_path)
    assert cfg.n == 2 and cfg.delta0 == 0.4 and cfg.t_grid().size == 9
    assert isinstance(cfg.u0, Dipole) and cfg.u0.amplitude == 2.0
    assert cfg.u1.amplitude == 0.0
    assert cfg.grid_enabled and cfg.grid_N == 256 and cfg.r_samples == (0.5, 1.0)


def test_grid_datum_round_trip(tmp_path):
    field = sample_datum(Gaussian(2, 1.0, 1.0), 16.0, 32)
    field.save(tmp_path / "u0.bin")
    (tmp_path / "g.toml").write_text('dimension = 2\n[u0]\nfamily = "grid"\npath = "u0.bin"\n')
    cfg = load_config(tmp_path / "g.toml")
    assert isinstance(cfg.u0, GridSamples) and cfg.u0.N == 32


def test_config_dimension_mismatch():
    with pytest.raises(ConfigError):
        ExperimentConfig(n=2, u0=Gaussian(1))


def test_console_script_runs(lemma21_config):
    proc = subprocess.run([sys.executable, "-m", "strongdamp", "lemma22", "--config", str(lemma21_config)],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("PASS") == 3

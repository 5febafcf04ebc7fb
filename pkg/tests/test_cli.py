import json
import math
import os

import numpy as np
import pytest

from qimag.cli import main
from qimag.config import dump_toml, parse_config
from qimag.errors import ConfigError

from conftest import read_timeseries

BOX_N = 64
BOX_DX = math.pi / (BOX_N + 1)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


EVOLVE_COMPLEX = f"""
mode = "evolve-complex"
seed = 0

[grid]
n = {BOX_N}
dx = {BOX_DX!r}
boundary = "dirichlet"

[run]
t_end = 5.0
dt = 0.00055
output_stride = 400

[complex]
theta0 = 0.3

[complex_initial]
kind = "eigenstate"
level = 1
"""


def discrete_ground_energy():
    k = math.pi / ((BOX_N + 1) * BOX_DX)
    return (1.0 - math.cos(k * BOX_DX)) / BOX_DX**2


def test_parse_and_validation_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config("mode = 'evolve-complex'\n[grid]\nn = 4\ndx = 0.1")
    with pytest.raises(ConfigError):
        parse_config("mode = \"evolve-complex\"")  # missing [run]
    with pytest.raises(ConfigError):
        parse_config("unknown_key = 1")
    with pytest.raises(ConfigError):
        parse_config("[grid]\n[grid.sub]\nx = 1")
    # stability bound enforced at load time
    bad = EVOLVE_COMPLEX.replace("dt = 0.00055", "dt = 0.1")
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_effective_round_trip_text():
    cfg = parse_config(EVOLVE_COMPLEX)
    text = dump_toml(cfg.effective())
    cfg2 = parse_config(text)
    assert cfg2.effective() == cfg.effective()


def test_cli_unknown_mode_exit_2(tmp_path):
    path = write(tmp_path / "bad.toml", 'mode = "nope"\n')
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == 2


def test_cli_parse_error_exit_2(tmp_path):
    path = write(tmp_path / "bad.toml", "[run\n")
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == 2


def test_cli_run_needs_config(tmp_path):
    assert main(["run", "--out", str(tmp_path / "o")]) == 2


def test_evolve_complex_decay_slope(tmp_path, capsys):
    path = write(tmp_path / "cfg.toml", EVOLVE_COMPLEX)
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out),
                 "--no-timestamp"]) == 0
    data = read_timeseries(out / "timeseries.csv")
    slope = np.polyfit(data["t"], np.log(data["norm"]), 1)[0]
    expected = -discrete_ground_energy() * math.sin(0.3)
    assert abs(slope - expected) <= 1e-5
    # the instantaneous rate column carries the same number
    assert np.max(np.abs(data["ln_norm_rate"] - expected)) <= 1e-5
    # continuity residual columns stay at truncation level
    assert np.max(data["residual_cc16"]) <= 1e-9
    assert np.max(data["residual_cc04"]) <= 1e-2
    assert os.path.exists(out / "effective-config.toml")


def test_evolve_complex_rerun_from_echo_is_identical(tmp_path):
    short = EVOLVE_COMPLEX.replace("t_end = 5.0", "t_end = 0.5")
    path = write(tmp_path / "cfg.toml", short)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", "--config", path, "--out", str(out1),
                 "--no-timestamp"]) == 0
    assert main(["run", "--config", str(out1 / "effective-config.toml"),
                 "--out", str(out2), "--no-timestamp"]) == 0
    assert (out1 / "timeseries.csv").read_bytes() \
        == (out2 / "timeseries.csv").read_bytes()


def test_evolve_quat_period_recurrence(tmp_path):
    n = 32
    dx = math.pi / (n + 1)
    k = math.pi / ((n + 1) * dx)
    e0 = (1.0 - math.cos(k * dx)) / dx**2
    period = 2 * math.pi / e0
    steps = 6400
    cfg = f"""
mode = "evolve-quat"

[grid]
n = {n}
dx = {dx!r}
boundary = "dirichlet"

[run]
t_end = {period!r}
dt = {period / steps!r}
output_stride = 800

[quat]
gamma0 = 0.7
omega0 = -0.2
level = 1
"""
    path = write(tmp_path / "cfg.toml", cfg)
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out),
                 "--no-timestamp"]) == 0
    data = read_timeseries(out / "timeseries.csv")
    assert abs(data["t"][-1] - period) <= 1e-9
    assert data["lambda_period_error"][-1] <= 1e-8
    assert np.max(np.abs(data["norm"] - 1.0)) <= 1e-9
    assert np.max(np.abs(data["B_integral"])) <= 1e-12
    assert np.max(np.abs(data["G_integral"])) <= 1e-12
    assert np.max(data["residual_gi08"]) <= 1e-9


def test_eigen_mode(tmp_path):
    cfg = f"""
mode = "eigen-reduce"

[grid]
n = {BOX_N}
dx = {BOX_DX!r}
boundary = "dirichlet"

[eigen]
k = [0.0, 1.0, 0.0]
g = [0.0, 0.0, 2.0]
gamma0 = 0.3
omega0 = -0.1
level = 1
t_check = 0.37
"""
    path = write(tmp_path / "cfg.toml", cfg)
    out = tmp_path / "out"
    assert main(["eigen", "--config", path, "--out", str(out),
                 "--no-timestamp"]) == 0
    payload = json.loads((out / "eigen-report.json").read_text())
    assert payload["laplace_eigenvalue"] == pytest.approx(5.0, abs=1e-12)
    assert payload["status"] == "pass"
    assert payload["pde_residual"] <= payload["tolerance"]
    # non-orthogonal wave vectors are a configuration error
    bad = cfg.replace("[0.0, 1.0, 0.0]", "[0.0, 1.0, 1.0]") \
             .replace("[0.0, 0.0, 2.0]", "[0.0, 2.0, 0.0]")
    bad_path = write(tmp_path / "bad.toml", bad)
    assert main(["eigen", "--config", bad_path, "--out", str(out)]) == 2


def test_audit_cli_minimal(tmp_path, capsys):
    out = tmp_path / "audit"
    assert main(["audit", "--out", str(out), "--seed", "11",
                 "--no-timestamp"]) == 0
    report = json.loads((out / "audit-report.json").read_text())
    assert report["failed"] == 0
    assert report["seed"] == 11
    record = report["cases"][0]
    for key in ("name", "equation_ref", "max_residual", "tolerance", "status",
                "note"):
        assert key in record
    printed = capsys.readouterr().out
    assert "identities pass" in printed


def test_audit_cli_reports_identical_across_threads(tmp_path):
    out1, out2 = tmp_path / "a1", tmp_path / "a2"
    assert main(["audit", "--out", str(out1), "--seed", "4", "--threads", "1",
                 "--no-timestamp"]) == 0
    assert main(["audit", "--out", str(out2), "--seed", "4", "--threads", "4",
                 "--no-timestamp"]) == 0
    assert (out1 / "audit-report.json").read_bytes() \
        == (out2 / "audit-report.json").read_bytes()


def test_audit_config_mode_mismatch(tmp_path):
    path = write(tmp_path / "cfg.toml", EVOLVE_COMPLEX)
    assert main(["audit", "--config", path, "--out", str(tmp_path / "o")]) == 2


def test_gaussian_initial_state_runs(tmp_path):
    cfg = f"""
mode = "evolve-complex"

[grid]
n = 128
dx = {2 * math.pi / 128!r}
boundary = "periodic"

[run]
t_end = 0.02
dt = 0.0005
output_stride = 10

[complex]
theta0 = 0.2

[complex_potential]
form = "sine"
amplitude = 0.3
wavenumber = 1.0

[complex_initial]
kind = "gaussian"
center = 3.14159
width = 0.8
momentum = 2.0
"""
    path = write(tmp_path / "cfg.toml", cfg)
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out),
                 "--no-timestamp"]) == 0
    data = read_timeseries(out / "timeseries.csv")
    assert data["norm"][0] == pytest.approx(1.0, abs=1e-12)

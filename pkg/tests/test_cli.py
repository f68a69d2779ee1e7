import json
import os
import subprocess
import sys

import numpy as np
import pytest

from stirap_pmp.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from stirap_pmp.config import default_config
from stirap_pmp.export import read_csv


@pytest.fixture
def config(tmp_path):
    cfg = default_config()
    cfg.grid = {"duration": 80.0, "steps": 2000}
    cfg.output_dir = str(tmp_path / "out")
    cfg.scan1d = {"knob": "eta_omega", "values": [1.0]}
    cfg.scan2d = {"knobs": ["eta_omega", "delta"], "values": [[0.95, 1.0], [0.0, 0.01, 0.02]]}
    return cfg.dump(tmp_path / "run.json")


def run(config, *args):
    return main([args[0], "--config", str(config), *args[1:]])


def out_dir(config):
    return config.parent / "out"


def column(path, name):
    header, data = read_csv(path)
    return data[:, header.index(name)]


def test_spectrum(config, capsys):
    assert run(config, "spectrum") == EXIT_OK
    header, data = read_csv(out_dir(config) / "spectrum.csv")
    assert len(data) == 5
    ec, ej = default_config().transmon["charging_energy"], default_config().transmon["josephson_energy"]
    np.testing.assert_allclose(data[:, header.index("xi")], np.sqrt(2 * ec / ej))
    np.testing.assert_allclose(data[1:3, header.index("Delta_n")], 0, atol=1e-12)
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 6 and "0.00000000" in printed[2]


def test_simulate_consistency(config):
    assert run(config, "simulate") == EXIT_OK
    out = out_dir(config)
    summary = json.loads((out / "summary.json").read_text())
    p2 = column(out / "trajectory.csv", "P_2")
    assert summary["fidelity"] == p2[-1]
    np.testing.assert_allclose(column(out / "trajectory.csv", "P_leak"),
                               column(out / "trajectory.csv", "P_3") + column(out / "trajectory.csv", "P_4"),
                               rtol=1e-15, atol=1e-300)
    assert {"fidelity", "max_leakage", "duration_effective"} <= set(summary)
    line = (out / "trajectory.csv").read_text().splitlines()[5]
    assert any(len(v.replace("-", "").replace(".", "").split("e")[0]) >= 16 for v in line.split(","))


def test_simulate_zero_drive(config):
    assert run(config, "simulate", "--set", "pulses.amp_p=0", "--set", "pulses.amp_s=0") == EXIT_OK
    out = out_dir(config)
    assert json.loads((out / "summary.json").read_text())["fidelity"] == 0.0
    p0 = column(out / "trajectory.csv", "P_0")
    assert np.ptp(column(out / "trajectory.csv", "P_2")) == 0
    assert np.all(np.diff(p0) <= 0) and p0[-1] > 0.99


def test_simulate_params_file(config, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"params": {"amp_p": 0.5, "amp_s": 0.6, "t0_p": 50, "t0_s": 30,
                                           "sigma_p": 9, "sigma_s": 9}}))
    assert run(config, "simulate", "--params", str(path)) == EXIT_OK
    assert run(config, "simulate", "--params", "optimized") == EXIT_CONFIG
    assert run(config, "simulate", "--params", str(tmp_path / "none.json")) == EXIT_CONFIG


def test_optimize_zero_iterations(config):
    assert run(config, "optimize", "--set", "optimizer.max_iter=0") == EXIT_OK
    out = out_dir(config)
    params = json.loads((out / "optimized_params.json").read_text())["params"]
    assert params == default_config().pulses
    summary = json.loads((out / "summary.json").read_text())
    assert summary["backends_available"] == ["trust-region", "gradient-descent"]
    for name in ("simulate_initial.csv", "simulate_optimized.csv", "convergence.csv"):
        assert (out / name).exists()


def test_optimize_convergence_log(config):
    assert run(config, "optimize", "--set", "optimizer.max_iter=6") == EXIT_OK
    out = out_dir(config)
    f = column(out / "convergence.csv", "f")
    accepted = column(out / "convergence.csv", "accepted").astype(bool)
    assert np.all(np.diff(f[accepted]) < 0)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["optimized"]["objective"] < summary["initial"]["objective"]


def test_optimize_gradient_descent_backend(config):
    assert run(config, "optimize", "--backend", "gradient-descent",
               "--set", "gradient_descent.max_iter=3", "--set", "gradient_descent.eta=0.01") == EXIT_OK
    summary = json.loads((out_dir(config) / "summary.json").read_text())
    assert summary["backend"] == "gradient-descent"
    assert summary["optimized"]["objective"] <= summary["initial"]["objective"]


def test_gradcheck(config, capsys):
    assert run(config, "gradcheck") == EXIT_OK
    header, data = read_csv_rows(out_dir(config) / "gradcheck.csv")
    assert {"abs_error", "rel_error", "analytic", "finite_difference"} <= set(header)
    assert all(float(r[header.index("rel_error")]) < 1e-5 for r in data)
    assert run(config, "gradcheck", "--corrupt-gradient") == EXIT_CHECK


def read_csv_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_scans(config):
    assert run(config, "scan1d") == EXIT_CONFIG  # no optimized pulses yet
    assert run(config, "optimize", "--set", "optimizer.max_iter=3") == EXIT_OK
    opt = str(out_dir(config) / "optimized_params.json")
    assert run(config, "simulate", "--params", opt) == EXIT_OK
    f_sim = json.loads((out_dir(config) / "summary.json").read_text())["fidelity"]
    assert run(config, "scan1d", "--optimized", opt) == EXIT_OK
    assert column(out_dir(config) / "scan1d.csv", "F_opt")[0] == f_sim
    assert run(config, "scan2d", "--optimized", opt, "--workers", "2") == EXIT_OK
    header, data = read_csv_rows(out_dir(config) / "scan2d.csv")
    assert len(data) == 6
    meta = json.loads((out_dir(config) / "scan2d.json").read_text())["metadata"]
    assert set(meta["fixed_knobs"]) == {"eta_t", "eta_alpha", "delta_omega_d", "delta_omega",
                                        "delta_omega_32", "delta_omega_43"}


def test_exit_codes(config, tmp_path):
    assert run(config, "simulate", "--set", "bogus=1") == EXIT_CONFIG
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert run(config, "scan1d", "--set", "scan1d.knob=\"bogus\"",
               "--set", "optimized_pulses=" + json.dumps(default_config().pulses)) == EXIT_CONFIG
    assert run(config, "simulate", "--set", "decay_rates=[0, 1e308, 1e308, 1e308, 1e308]",
               "--set", "grid.steps=50") == EXIT_NUMERIC


def test_module_entry_point(config):
    env = dict(os.environ, STIRAP_PMP_LOG="DEBUG")
    proc = subprocess.run([sys.executable, "-m", "stirap_pmp", "spectrum", "--config", str(config)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "stirap_pmp", "spectrum"], capture_output=True, text=True)
    assert proc.returncode != 0 and "--config" in proc.stderr

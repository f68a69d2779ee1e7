import json

import pytest

from stirap_pmp.config import ConfigError, RunConfig, apply_overrides, default_config, load_config


def test_roundtrip(tmp_path):
    cfg = default_config()
    cfg.scan2d = {"knobs": ["eta_omega", "delta"], "values": [[0.9, 1.0], [0.0]]}
    path = cfg.dump(tmp_path / "run.json")
    again = load_config(path)
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_overrides():
    data = default_config().to_dict()
    out = apply_overrides(data, ["grid.steps=500", "weights.w_1=0.02", "output_dir=elsewhere", "optimizer.eta=0.2"])
    assert out["grid"]["steps"] == 500 and out["weights"]["w_1"] == 0.02
    assert out["output_dir"] == "elsewhere" and out["optimizer"] == {"eta": 0.2}
    assert data["grid"]["steps"] is None
    with pytest.raises(ConfigError):
        apply_overrides(data, ["noequals"])
    with pytest.raises(ConfigError):
        apply_overrides(data, ["output_dir.x=1"])


def test_exactly_one_system():
    d = default_config().to_dict()
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**d, "transmon": None})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**d, "chain": {"detunings": [0, 0, 0], "links": [[0, "p", 1.0]]}})


def test_direct_chain():
    d = default_config().to_dict()
    d.update(transmon=None, decay_rates=None,
             chain={"detunings": [0, 0, 0], "links": [[0, "p", 1.0], [1, "s", 1.0]], "dissipation": [[0.01, 1, 0]]})
    cfg = RunConfig.from_dict(d)
    system = cfg.system()
    assert system.dimension == 3 and len(system.dissipation) == 1
    with pytest.raises(ConfigError):
        cfg.transmon_spec()


@pytest.mark.parametrize("patch", [
    {"bogus": 1},
    {"pulses": {"amp_p": 1}},
    {"weights": {"w_f": -1}},
    {"optimizer": {"eta": 2.0}},
    {"frame": "sideways"},
])
def test_invalid(patch):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**default_config().to_dict(), **patch})


def test_invalid_system_surfaces_as_config_error(tmp_path):
    d = default_config().to_dict()
    d["transmon"]["charging_energy"] = -1.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    with pytest.raises(ConfigError):
        load_config(path).system()
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_explicit_frame_and_grid():
    cfg = default_config()
    spectrum, frame = cfg.frame_spec()
    cfg.frame = {"omega_p": float(frame.omega_p), "omega_s": float(frame.omega_s) - 0.01}
    cfg.grid = {"duration": 80.0, "steps": 1000}
    assert cfg.time_grid().steps == 1000
    assert cfg.system().detunings[2] == pytest.approx(0.01, abs=1e-12)
    assert cfg.setup().omega_s == cfg.frame["omega_s"]

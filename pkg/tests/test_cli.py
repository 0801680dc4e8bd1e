import json
import math

import numpy as np
import pytest

from tsblowflies.cli import main
from tsblowflies.config import RunConfig, example51_config
from tsblowflies.errors import ConfigError


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg.dumps() if isinstance(cfg, RunConfig) else json.dumps(cfg))
    return str(p)


def short51(kind="reals", t_end=40.0, factors=None):
    cfg = example51_config(kind)
    cfg.run["t_end"] = t_end
    if factors:
        cfg.model["scale"] = factors
    return cfg


def decay_config():
    return {
        "scale": {"kind": "reals"},
        "model": {"c": [{"const": 0.5}], "b": [[None]], "beta": [[{"const": 0.0}]],
                  "alpha": [[{"const": 1.0}]], "tau": [[{"const": 0.0}]]},
        "initial_conditions": [[1.0]],
        "grid": {"max_step": 0.01},
        "run": {"t0": 0.0, "t_end": 5.0},
    }


def test_certify_preset_reflects_h3(tmp_path):
    code = main(["certify", "--config", write(tmp_path, short51()), "--out", str(tmp_path / "o")])
    cert = json.loads((tmp_path / "o" / "certificate.json").read_text())
    assert code == 2
    assert [c["name"] for c in cert["conditions"] if not c["holds"]] == ["H3"]
    assert any(d["symbol"] == "beta_minus" for d in cert["divergences"])


def test_certify_beta_times_ten(tmp_path):
    code = main(["certify", "--config", write(tmp_path, short51(factors={"beta": 10})), "--out", str(tmp_path)])
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert code == 2
    assert not next(c for c in cert["conditions"] if c["name"] == "H5")["holds"]


def test_malformed_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"scale": {"kind": "reals"}}')
    assert main(["certify", "--config", str(p), "--out", str(tmp_path)]) == 1
    assert "missing" in capsys.readouterr().err
    p.write_text("{nope")
    assert main(["certify", "--config", str(p), "--out", str(tmp_path)]) == 1
    assert main(["certify", "--config", str(tmp_path / "absent.json")]) == 1


def test_deterministic_outputs(tmp_path):
    cfg = write(tmp_path, short51("integers", 60.0))
    for d in ("a", "b"):
        assert main(["certify", "--config", cfg, "--out", str(tmp_path / d)]) == 2
        main(["simulate", "--config", cfg, "--out", str(tmp_path / d)])
    for f in ("certificate.json", "trajectory_1.csv", "simulation.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_simulate_pure_decay(tmp_path):
    assert main(["simulate", "--config", write(tmp_path, decay_config()), "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "trajectory_1.csv", delimiter=",", skiprows=1)
    assert np.allclose(data[:, 1], np.exp(-0.5 * data[:, 0]), atol=1e-9)
    assert (tmp_path / "trajectory_1.csv").read_text().startswith("t,x1\n")


def test_simulate_preset_box(tmp_path):
    code = main(["simulate", "--config", write(tmp_path, short51()), "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "simulation.json").read_text())
    assert code == (0 if all(s["compliant"] for s in summary) else 2)


def test_envelope_preset(tmp_path):
    cfg = short51("reals", 60.0)
    assert main(["envelope", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "envelope.json").read_text())
    assert rep["violations"] == 0
    assert (tmp_path / "envelope.csv").read_text().startswith("t,deviation,envelope\n")


def test_envelope_seeded_reference(tmp_path):
    cfg = short51("integers", 60.0)
    cfg.initial_conditions = cfg.initial_conditions[:1]
    p = write(tmp_path, cfg)
    assert main(["envelope", "--config", p, "--out", str(tmp_path / "a"), "--seed", "3"]) == 0
    assert main(["envelope", "--config", p, "--out", str(tmp_path / "b"), "--seed", "3"]) == 0
    assert (tmp_path / "a" / "envelope.csv").read_bytes() == (tmp_path / "b" / "envelope.csv").read_bytes()


def test_translate_tiny_eps(tmp_path):
    cfg = short51("reals", 60.0)
    cfg.run.update(eps=1e-12, candidates=[1.0, 2.0, 5.0])
    assert main(["translate", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    out = json.loads((tmp_path / "translation.json").read_text())
    assert out["report"]["accepted"] == []


def test_translate_steady_state(tmp_path):
    cfg = short51("reals", 150.0)
    assert main(["translate", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "translation.json").read_text())
    assert out["report"]["accepted"]
    assert out["report"]["inclusion_length"] != "inf"


def test_compare_preset(tmp_path):
    cfg = short51("reals", 60.0)
    assert main(["compare", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    out = json.loads((tmp_path / "compare.json").read_text())
    assert out["verdict"] == "uncertified on both"


def test_preset_command(tmp_path):
    code = main(["preset-example51", "--out", str(tmp_path)])
    assert code == 2
    for scale in ("reals", "integers"):
        assert (tmp_path / scale / "certificate.json").exists()
        cfg = RunConfig.load(tmp_path / scale / "config.json")
        assert cfg.scale == {"kind": scale}


def test_config_round_trip():
    for cfg in (example51_config("reals"), example51_config("integers"), RunConfig.from_dict(decay_config())):
        again = RunConfig.loads(cfg.dumps())
        assert again.to_dict() == cfg.to_dict()
        assert again.dumps() == cfg.dumps()


def test_config_scale_kinds():
    base = decay_config()
    for desc in ({"kind": "step", "h": 0.5}, {"kind": "union", "base": {"kind": "integers"}, "points": [0.25]},
                 {"kind": "explicit", "intervals": [[-2, 3]], "points": [4, 5]}):
        cfg = RunConfig.from_dict({**base, "scale": desc})
        ts = cfg.scale_family().on((-1, 5))
        assert not ts.is_empty
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "scale": {"kind": "cantor"}})


def test_config_window_must_cover():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**decay_config(), "grid": {"window": [1.0, 5.0]}})


def test_config_ic_dimension():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**decay_config(), "initial_conditions": [[1.0, 2.0]]})

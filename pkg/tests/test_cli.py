import json

import pytest

from uavmimo.cli import main, resolve_threads
from uavmimo.config import ConfigError


def test_swarm_command_prints_split(capsys):
    assert main(["swarm", "--r1", "2e6", "--r2", "1e6", "--total", "3"]) == 0
    out = capsys.readouterr().out
    assert "t1 = 1.0 s" in out
    assert "t2 = 2.0 s" in out
    assert "throughput" in out


def test_swarm_command_writes_json(tmp_path, capsys):
    target = tmp_path / "split.json"
    code = main(["swarm", "--r1", "5e6", "--r2", "5e6", "--total", "2",
                 "--json", str(target)])
    assert code == 0
    payload = json.loads(target.read_text())
    assert payload["t1_s"] == pytest.approx(1.0)
    assert payload["throughput_bps"] == pytest.approx(2.5e6)
    assert sorted(payload) == ["rate1_bps", "rate2_bps", "t1_s", "t2_s",
                               "throughput_bps"]


def test_swarm_command_rejects_bad_rates(capsys):
    assert main(["swarm", "--r1", "0", "--r2", "1e6", "--total", "3"]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_decontam_writes_outputs(tmp_path, capsys):
    cfg = {"n_drops": 2, "n_uavs": 2, "n_gues": 2, "n_sites": 2}
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    code = main(["run", "--scenario", "decontam", "--config", str(cfg_path),
                 "--out", str(out_dir), "--threads", "1"])
    assert code == 0
    assert (out_dir / "sinr_cdf.csv").exists()
    assert (out_dir / "summary.json").exists()
    manifest = json.loads((out_dir / "run_manifest.json").read_text())
    assert manifest["scenario"] == "decontam"
    assert manifest["config"]["n_drops"] == 2
    assert manifest["outputs"] == ["sinr_cdf.csv", "summary.json"]
    header = (out_dir / "sinr_cdf.csv").read_text().splitlines()[0]
    assert header == "drop,user_id,kind,scheme,sinr_db"


def test_run_tracking_writes_outputs(tmp_path, capsys):
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps({"n_drops": 1}))
    out_dir = tmp_path / "out"
    code = main(["run", "--scenario", "tracking", "--config", str(cfg_path),
                 "--out", str(out_dir), "--threads", "1", "--seed", "7"])
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["seed"] == 7
    assert summary["pilot_count"] == {"conventional": [8], "angular_speed": [8],
                                      "kalman": [16]}
    header = (out_dir / "tracking.csv").read_text().splitlines()[0]
    assert header == ("time_s,scheme,normalized_gain,true_az_deg,true_el_deg,"
                      "est_az_deg,est_el_deg,trajectory_id")


def test_run_drops_override(tmp_path, capsys):
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps({"n_drops": 50, "n_uavs": 1, "n_gues": 1,
                                    "n_sites": 1}))
    out_dir = tmp_path / "out"
    code = main(["run", "--scenario", "decontam", "--config", str(cfg_path),
                 "--out", str(out_dir), "--threads", "1", "--drops", "1"])
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["n_drops"] == 1


def test_run_rejects_malformed_config(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"pilot_len": -3}))
    code = main(["run", "--scenario", "decontam", "--config", str(cfg_path),
                 "--out", str(tmp_path / "out")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_run_rejects_unknown_config_key(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"n_dorps": 3}))
    code = main(["run", "--scenario", "decontam", "--config", str(cfg_path),
                 "--out", str(tmp_path / "out")])
    assert code == 2
    err = capsys.readouterr().err
    assert "n_dorps" in err


def test_resolve_threads_priority(monkeypatch):
    monkeypatch.setenv("UAVMIMO_THREADS", "3")
    assert resolve_threads(5) == 5
    assert resolve_threads(None) == 3
    monkeypatch.delenv("UAVMIMO_THREADS")
    assert resolve_threads(None) >= 1


@pytest.mark.parametrize("env", ["zero", "0", "-2"])
def test_resolve_threads_rejects_bad_env(monkeypatch, env):
    monkeypatch.setenv("UAVMIMO_THREADS", env)
    with pytest.raises(ConfigError):
        resolve_threads(None)


def test_resolve_threads_rejects_bad_flag():
    with pytest.raises(ConfigError):
        resolve_threads(0)

import json
from pathlib import Path

import pytest

from memwords.config import RunConfig, Settings, _int_env, build_run_config, load_config_file, load_settings


def test_int_env_falls_back_on_garbage(monkeypatch):
    monkeypatch.setenv("MEMWORDS_HORIZON_CAP", "lots")
    assert _int_env("MEMWORDS_HORIZON_CAP", 7) == 7
    monkeypatch.setenv("MEMWORDS_HORIZON_CAP", "64")
    assert _int_env("MEMWORDS_HORIZON_CAP", 7) == 64


def test_load_settings_reads_environment(monkeypatch):
    monkeypatch.setenv("MEMWORDS_GAMMA", "0.4")
    monkeypatch.setenv("MEMWORDS_OUT_DIR", "/tmp/runs")
    monkeypatch.setenv("MEMWORDS_LOG_LEVEL", "info")
    monkeypatch.setenv("ES_VERIFY_TLS", "false")
    monkeypatch.setenv("ES_INDEX_PREFIX", "  ")
    s = load_settings()
    assert s.gamma == 0.4
    assert s.out_dir == Path("/tmp/runs")
    assert s.log_level == "INFO"
    assert s.es_verify_tls is False
    assert s.es_index_prefix == "memwords"


def test_precedence_default_env_file_flags():
    settings = Settings(gamma=0.4, beta=0.1, horizon_cap=99)
    config = build_run_config(
        "adversary",
        settings,
        {"beta": 0.15, "replicates": 30, "seeds": 3},
        {"replicates": 40, "stages": None, "verbose": 1, "command": "adversary"},
    )
    assert config.gamma == 0.4
    assert config.beta == 0.15
    assert config.replicates == 40
    assert config.stages == 1
    assert config.seeds == (3,)
    assert config.horizon_cap == 99


def test_run_config_validates_parameters():
    with pytest.raises(ValueError, match="beta"):
        RunConfig(command="estimate", gamma=0.5, beta=0.25)
    with pytest.raises(ValueError, match="seed"):
        RunConfig(command="estimate", seeds=())


def test_load_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"horizon-cap": 64, "checkpoints": [9, 99]}))
    assert load_config_file(path) == {"horizon_cap": 64, "checkpoints": [9, 99]}


@pytest.mark.parametrize("content,message", [("{\"gama\": 1}", "unknown config keys"), ("[1]", "JSON object"), ("{", "unreadable")])
def test_load_config_file_rejects(tmp_path, content, message):
    path = tmp_path / "run.json"
    path.write_text(content)
    with pytest.raises(ValueError, match=message):
        load_config_file(path)

import json
from pathlib import Path

import pytest

from interfere.config import DEFAULTS, load_config, parse_config
from interfere.errors import ConfigError
from interfere.forecast.arima import ArimaConfig
from interfere.forecast.lstm import LstmConfig
from interfere.forecast.transformer import TransformerConfig
from interfere.seeding import derive_seed

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_defaults_mirror_the_reference_tables():
    cfg = parse_config()
    sc = cfg.scenario
    assert sc.desired.mean_power_db == 20.0
    assert [l.mean_power_db for l in sc.interferers] == [5.0, 2.0, 0.0, -3.0, -10.0, 1.0]
    assert all(l.doppler_ts == 0.01 for l in sc.interferers)
    assert sc.noise_power == 1.0 and sc.trace_length == 200
    p = cfg.predictor
    assert isinstance(p, TransformerConfig)
    assert (p.window, p.blocks, p.head_size, p.heads, p.ff_dim) == (10, 16, 32, 16, 4)
    assert (p.dropout, p.epochs, p.learning_rate, p.batch_size) == (0.2, 100, 1e-3, 16)
    assert cfg.allocation.targets == [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
    assert cfg.allocation.payload_bits == 50 and cfg.allocation.alpha == 0.01
    assert cfg.pipeline == "proposed" and cfg.scale == "db"


def test_shipped_table1_config_equals_defaults():
    assert json.loads((CONFIGS / "table1.json").read_text()) == DEFAULTS
    assert load_config(CONFIGS / "table1.json") == parse_config()
    load_config(CONFIGS / "smoke.json")


def test_seeds_derive_from_global_seed():
    cfg = parse_config({"global_seed": 7})
    assert cfg.scenario.rng_seed == derive_seed(7, "scenario")
    assert cfg.predictor.seed == derive_seed(7, "predictor")
    assert parse_config({"global_seed": 8}).scenario.rng_seed != cfg.scenario.rng_seed


def test_predictor_kind_replaces_defaults():
    cfg = parse_config({"predictor": {"kind": "lstm", "epochs": 3}})
    assert isinstance(cfg.predictor, LstmConfig) and cfg.predictor.epochs == 3
    assert cfg.predictor.window == 30
    assert cfg.predictor_kind == "lstm"
    cfg = parse_config({"predictor": {"kind": "arima", "p": 4}})
    assert cfg.predictor == ArimaConfig(p=4)


def test_partial_override_merges():
    cfg = parse_config({"predictor": {"epochs": 2}, "scenario": {"trace_length": 300}})
    assert cfg.predictor.epochs == 2 and cfg.predictor.blocks == 16
    assert cfg.scenario.trace_length == 300 and len(cfg.scenario.interferers) == 6


@pytest.mark.parametrize("doc", [
    {"schema_version": 2},
    {"colour": "red"},
    {"global_seed": -1},
    {"global_seed": "0"},
    {"scenario": {"trace_length": 0}},
    {"scenario": {"rng_seed": 3}},
    {"scenario": {"interferers": []}},
    {"scenario": {"interferers": [{"mean_power_db": 25.0}]}},
    {"scenario": {"desired": {"mean_power_db": 20.0, "fading": "rician"}}},
    {"predictor": {"kind": "gru"}},
    {"predictor": {"seed": 1}},
    {"predictor": {"heads": 0}},
    {"pipeline": "hybrid"},
    {"scale": "neper"},
    {"sift": {"boundary_policy": "wrap"}},
    {"allocation": {"targets": [1e-3, 1e-1]}},
    {"allocation": {"targets": [0.5]}},
    {"allocation": {"estimators": ["oracle"]}},
    {"allocation": {"ma_index": "next"}},
    {"allocation": {"payload_bits": 0}},
])
def test_invalid_documents(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.json")


def test_overrides_layer_over_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"global_seed": 3, "pipeline": "conventional"}))
    cfg = load_config(path, {"global_seed": 4})
    assert cfg.global_seed == 4 and cfg.pipeline == "conventional"

"""Tests for configuration layering."""

import pytest

from crosstalk.config import (
    CrosstalkConfig,
    ModelConfig,
    TrainConfig,
    configure,
    get_config,
    load_overrides,
    parse_override,
)
from crosstalk.errors import ConfigError


def test_defaults():
    config = CrosstalkConfig()
    assert config.model.variant == "mtrans"
    assert config.model.hidden_size == 64
    assert config.train.batch_size == 24
    assert config.train.objectives == ["tlm", "hpsi", "spi", "uor", "sai"]
    assert config.roles[0] == "ARG0"


def test_env_layer(monkeypatch):
    monkeypatch.setenv("CROSSTALK_SEED", "7")
    monkeypatch.setenv("CROSSTALK_TRACING", "true")
    config = CrosstalkConfig.from_env()
    assert config.train.seed == 7
    assert config.tracing_enabled is True


def test_file_then_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("hidden_size: 32\nmax_lr: 0.001\nvariant: standard\n", encoding="utf-8")

    config = configure(config_file=str(path), max_lr=0.002, device="cuda:1")

    assert config.model.hidden_size == 32
    assert config.model.variant == "standard"
    assert config.train.max_lr == 0.002
    assert config.device == "cuda:1"
    assert get_config() is config


def test_apply_coerces_types():
    config = CrosstalkConfig().apply(
        {"freeze_lm": "yes", "word_layers": "3", "objectives": "tlm, sai", "roles": "ARG0,ARG1"}
    )
    assert config.train.freeze_lm is True
    assert config.model.word_layers == 3
    assert config.train.objectives == ["tlm", "sai"]
    assert config.roles == ["ARG0", "ARG1"]


def test_apply_revalidates_together():
    config = CrosstalkConfig().apply({"max_lr": 1e-6, "min_lr": 1e-7})
    assert config.train.max_lr == 1e-6


@pytest.mark.parametrize(
    "overrides",
    [
        {"unknown_key": 1},
        {"variant": "sideways"},
        {"min_lr": 1.0},
        {"objectives": "tlm,xyz"},
        {"backbone_layers": 2},
        {"hidden_size": 30},
        {"spi_ratio": 120},
        {"patience": 0},
        {"word_layers": "many"},
    ],
)
def test_invalid_overrides(overrides):
    with pytest.raises(ConfigError):
        CrosstalkConfig().apply(overrides)


def test_parse_override():
    assert parse_override("max_lr=1.5e-4") == ("max_lr", 1.5e-4)
    assert parse_override("freeze_lm=true") == ("freeze_lm", True)
    assert parse_override(" word_layers = 3") == ("word_layers", 3)
    with pytest.raises(ConfigError):
        parse_override("max_lr")


def test_load_overrides_rejects_nested(tmp_path):
    path = tmp_path / "nested.yaml"
    path.write_text("model:\n  hidden_size: 8\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="nested"):
        load_overrides(path)


def test_to_dict_is_flat():
    flat = CrosstalkConfig().to_dict()
    assert flat["hidden_size"] == 64
    assert flat["max_lr"] == 5e-5
    assert flat["device"] == "cpu"
    assert "model" not in flat


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError):
        ModelConfig(dropout=1.5)
    with pytest.raises(ValueError):
        TrainConfig(stage="finetune")

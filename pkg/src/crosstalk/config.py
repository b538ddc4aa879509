"""
Configuration management for crosstalk.

Settings come from three layers, applied in order: environment variables,
an optional flat key-value YAML file, and explicit overrides (``--set`` on
the command line or keyword arguments to :func:`configure`).
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml

from crosstalk.errors import ConfigError

_config: Optional["CrosstalkConfig"] = None

# Roles shared by standard SRL and CSRL annotations.
DEFAULT_ROLES: List[str] = [
    "ARG0",
    "ARG1",
    "ARG2",
    "ARG3",
    "ARG4",
    "ARG-LOC",
    "ARG-TMP",
    "ARG-PRP",
]

OBJECTIVES: List[str] = ["tlm", "hpsi", "spi", "uor", "sai"]

VARIANTS = ("standard", "mtrans", "later-mtrans", "both-mtrans")


@dataclass
class ModelConfig:
    """Widths, layer counts and variant choice for the encoder stack."""

    # Backbone (stand-in for the cross-lingual language model)
    backbone_layers: int = 4
    backbone_hidden: int = 32
    backbone_heads: int = 4
    max_len: int = 512
    word_pooling: str = "first"  # first, mean

    # Hierarchical encoders
    hidden_size: int = 64
    heads: int = 4
    ffn_size: int = 128
    word_layers: int = 2
    pa_layers: int = 1
    utterance_layers: int = 2
    variant: str = "mtrans"
    concat_norm: str = "wide"  # wide, projected

    # Indicator embeddings
    turn_dim: int = 16
    speaker_dim: int = 16
    predicate_dim: int = 16
    max_speakers: int = 8
    max_turns: int = 64
    max_utterances: int = 64

    dropout: float = 0.1
    use_sc_encoder: bool = True

    def __post_init__(self) -> None:
        if self.backbone_layers < 4:
            raise ConfigError(
                f"backbone_layers must be >= 4 for top-four concatenation, "
                f"got {self.backbone_layers}"
            )
        if self.backbone_hidden % self.backbone_heads:
            raise ConfigError(
                f"backbone_hidden ({self.backbone_hidden}) must be divisible by "
                f"backbone_heads ({self.backbone_heads})"
            )
        if self.hidden_size % self.heads:
            raise ConfigError(
                f"hidden_size ({self.hidden_size}) must be divisible by heads ({self.heads})"
            )
        if self.word_layers < 0 or self.pa_layers < 0:
            raise ConfigError("word_layers and pa_layers must be non-negative")
        if self.utterance_layers < 1:
            raise ConfigError("utterance_layers must be >= 1")
        if self.variant not in VARIANTS:
            raise ConfigError(f"Unknown variant: {self.variant}")
        if self.word_pooling not in ("first", "mean"):
            raise ConfigError(f"Unknown word_pooling: {self.word_pooling}")
        if self.concat_norm not in ("wide", "projected"):
            raise ConfigError(f"Unknown concat_norm: {self.concat_norm}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")


@dataclass
class TrainConfig:
    """Optimization schedule and objective settings for one training run."""

    stage: str = "csrl"  # clm, sc, pa, csrl
    batch_size: int = 24

    # Learning rates (separate curve for the language-model parameters)
    max_lr: float = 5e-5
    min_lr: float = 1e-5
    lm_max_lr: float = 1e-5
    lm_min_lr: float = 1e-6
    warmup_fraction: float = 0.1
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    max_grad_norm: float = 1.0

    max_epochs: int = 50
    max_steps: int = 15000
    patience: int = 10

    freeze_lm: bool = False
    end2end: bool = False

    # Pre-training objectives
    objectives: List[str] = field(default_factory=lambda: list(OBJECTIVES))
    spi_ratio: float = 30.0  # K1, percent of units
    uor_ratio: float = 50.0  # K2, percent of utterances
    mask_rate: float = 0.15

    log_every: int = 10
    seed: int = 42

    def __post_init__(self) -> None:
        if not self.max_lr >= self.min_lr > 0:
            raise ConfigError(
                f"Need max_lr >= min_lr > 0, got {self.max_lr} / {self.min_lr}"
            )
        if not self.lm_max_lr >= self.lm_min_lr > 0:
            raise ConfigError(
                f"Need lm_max_lr >= lm_min_lr > 0, got {self.lm_max_lr} / {self.lm_min_lr}"
            )
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError(f"warmup_fraction must be in [0, 1), got {self.warmup_fraction}")
        for name in ("spi_ratio", "uor_ratio"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ConfigError(f"{name} must be in [0, 100], got {value}")
        if not 0.0 <= self.mask_rate <= 1.0:
            raise ConfigError(f"mask_rate must be in [0, 1], got {self.mask_rate}")
        unknown = [o for o in self.objectives if o not in OBJECTIVES]
        if unknown:
            raise ConfigError(f"Unknown objectives: {', '.join(unknown)}")
        if self.stage not in ("clm", "sc", "pa", "csrl"):
            raise ConfigError(f"Unknown stage: {self.stage}")


@dataclass
class CrosstalkConfig:
    """Configuration for crosstalk."""

    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    # Label inventory
    roles: List[str] = field(default_factory=lambda: list(DEFAULT_ROLES))

    # Runtime
    device: str = "cpu"
    output_dir: str = "runs"
    metrics_file: Optional[str] = None

    # Tracing
    tracing_enabled: bool = False
    otel_service_name: str = "crosstalk"

    # Logging
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "CrosstalkConfig":
        """Create configuration from environment variables."""
        config = cls(
            device=os.getenv("CROSSTALK_DEVICE", "cpu"),
            output_dir=os.getenv("CROSSTALK_OUTPUT_DIR", "runs"),
            metrics_file=os.getenv("CROSSTALK_METRICS_FILE"),
            tracing_enabled=os.getenv("CROSSTALK_TRACING", "false").lower() == "true",
            otel_service_name=os.getenv("CROSSTALK_OTEL_SERVICE_NAME", "crosstalk"),
            log_level=os.getenv("CROSSTALK_LOG_LEVEL", "INFO"),
        )
        seed = os.getenv("CROSSTALK_SEED")
        if seed is not None:
            config.train.seed = int(seed)
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "CrosstalkConfig":
        """
        Create configuration from environment variables plus a flat YAML file.

        Args:
            path: Path to a YAML mapping of field name to value

        Returns:
            The loaded configuration
        """
        config = cls.from_env()
        config.apply(load_overrides(path))
        return config

    def apply(self, overrides: Mapping[str, Any]) -> "CrosstalkConfig":
        """
        Apply flat overrides, routing each key to the section that defines it.

        Sections are re-validated after all keys are set, so combinations like
        ``max_lr``/``min_lr`` can be changed together.

        Args:
            overrides: Mapping of field name to value

        Returns:
            Self for chaining
        """
        model_values = asdict(self.model)
        train_values = asdict(self.train)
        top_level = {f.name for f in fields(self)} - {"model", "train"}

        for key, value in overrides.items():
            if key in model_values:
                model_values[key] = _coerce(key, value, model_values[key])
            elif key in train_values:
                train_values[key] = _coerce(key, value, train_values[key])
            elif key in top_level:
                setattr(self, key, _coerce(key, value, getattr(self, key)))
            else:
                raise ConfigError(f"Unknown config key: {key}")

        self.model = ModelConfig(**model_values)
        self.train = TrainConfig(**train_values)
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Flatten into a single key-value mapping."""
        flat: Dict[str, Any] = {}
        flat.update(asdict(self.model))
        flat.update(asdict(self.train))
        for f in fields(self):
            if f.name not in ("model", "train"):
                flat[f.name] = getattr(self, f.name)
        return flat


def load_overrides(path: str | Path) -> Dict[str, Any]:
    """Read a flat YAML mapping from disk."""
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a key-value mapping")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"{path}: nested sections are not supported ({', '.join(nested)})")
    return data


def parse_override(text: str) -> tuple[str, Any]:
    """Parse a ``key=value`` command-line override with YAML scalar rules."""
    if "=" not in text:
        raise ConfigError(f"Override must look like key=value, got: {text}")
    key, raw = text.split("=", 1)
    return key.strip(), yaml.safe_load(raw)


def _coerce(key: str, value: Any, current: Any) -> Any:
    """Coerce an override to the type of the field it replaces."""
    if value is None:
        return None
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
        if isinstance(current, list):
            if isinstance(value, str):
                return [item.strip() for item in value.split(",") if item.strip()]
            return list(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for {key}: {value!r} ({e})") from e
    return value


def configure(
    config_file: Optional[str] = None,
    device: Optional[str] = None,
    metrics_file: Optional[str] = None,
    tracing_enabled: Optional[bool] = None,
    log_level: Optional[str] = None,
    **overrides: Any,
) -> CrosstalkConfig:
    """
    Configure crosstalk.

    Args:
        config_file: Flat YAML file of field overrides
        device: Torch device for training and inference
        metrics_file: JSON-lines file for training metrics
        tracing_enabled: Enable OpenTelemetry spans around stages
        log_level: Logging level
        **overrides: Any ModelConfig / TrainConfig / top-level field

    Returns:
        The configured CrosstalkConfig instance
    """
    global _config

    config = CrosstalkConfig.from_file(config_file) if config_file else CrosstalkConfig.from_env()

    if device is not None:
        config.device = device
    if metrics_file is not None:
        config.metrics_file = metrics_file
    if tracing_enabled is not None:
        config.tracing_enabled = tracing_enabled
    if log_level is not None:
        config.log_level = log_level

    config.apply({k: v for k, v in overrides.items() if v is not None})

    _config = config
    return config


def get_config() -> CrosstalkConfig:
    """Get the current configuration."""
    global _config
    if _config is None:
        _config = CrosstalkConfig.from_env()
    return _config

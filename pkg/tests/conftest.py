"""
Shared fixtures.
"""

from __future__ import annotations

from typing import List

import pytest
import torch

from crosstalk import config as config_module
from crosstalk.config import DEFAULT_ROLES
from crosstalk.models import AnnotatedDialogue, LabelInventory, ParallelPair
from crosstalk.training import PretrainData
from tests.factories import tiny_config, toy_csrl, toy_dialogues, toy_pairs, toy_srl


@pytest.fixture(autouse=True)
def reset_config(monkeypatch):
    """Every test starts from a fresh global configuration."""
    for name in ("CROSSTALK_SEED", "CROSSTALK_DEVICE", "CROSSTALK_TRACING",
                 "CROSSTALK_METRICS_FILE", "CROSSTALK_OUTPUT_DIR", "CROSSTALK_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr(config_module, "_config", None)
    torch.manual_seed(0)


@pytest.fixture
def inventory() -> LabelInventory:
    return LabelInventory(DEFAULT_ROLES)


@pytest.fixture
def csrl_data() -> List[AnnotatedDialogue]:
    return toy_csrl()


@pytest.fixture
def pairs() -> List[ParallelPair]:
    return toy_pairs()


@pytest.fixture
def pretrain_data() -> PretrainData:
    return PretrainData(pairs=toy_pairs(), dialogues=toy_dialogues(), srl=toy_srl())


@pytest.fixture
def config():
    return tiny_config()

"""
Staged pre-training, CSRL training, checkpoints and inference.
"""

from crosstalk.training.checkpoint import Checkpoint, block_digests, digest
from crosstalk.training.inference import evaluate, predict
from crosstalk.training.schedule import lr_at, warmup_steps
from crosstalk.training.trainer import (
    FROZEN_BLOCKS,
    STAGE_OBJECTIVES,
    MetricsLog,
    PretrainData,
    Trainer,
    build_vocabulary,
    pretrain,
    pretrain_end2end,
    train_csrl,
)

__all__ = [
    "Checkpoint",
    "block_digests",
    "digest",
    "evaluate",
    "predict",
    "lr_at",
    "warmup_steps",
    "FROZEN_BLOCKS",
    "STAGE_OBJECTIVES",
    "MetricsLog",
    "PretrainData",
    "Trainer",
    "build_vocabulary",
    "pretrain",
    "pretrain_end2end",
    "train_csrl",
]

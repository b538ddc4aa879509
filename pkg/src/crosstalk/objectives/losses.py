"""
Cross-entropy losses for every objective.
"""

from __future__ import annotations

from enum import Enum

import torch
import torch.nn.functional as F

from crosstalk.model.batching import IGNORE_INDEX


class ObjectiveId(str, Enum):
    TLM = "tlm"
    HPSI = "hpsi"
    SPI = "spi"
    UOR = "uor"
    SAI = "sai"
    CSRL = "csrl"


def objective_loss(
    objective: ObjectiveId | str,
    logits: torch.Tensor,
    targets: torch.Tensor,
) -> torch.Tensor:
    """
    Mean cross-entropy over the defined target positions.

    Logits carry classes on the last axis: (B, T, V) for TLM, (B, 2) for
    HPSI, (B, N, C) for SPI and UOR, (B, W, |L|) for SAI and CSRL. Targets
    match the leading axes and hold IGNORE_INDEX where nothing is defined.

    Raises:
        ValueError: When no position has a target
    """
    objective = ObjectiveId(objective)
    if logits.shape[:-1] != targets.shape:
        raise ValueError(
            f"{objective.value}: logits {tuple(logits.shape)} do not match "
            f"targets {tuple(targets.shape)}"
        )
    flat_targets = targets.reshape(-1)
    if not (flat_targets != IGNORE_INDEX).any():
        raise ValueError(f"{objective.value}: no targets in batch")
    return F.cross_entropy(
        logits.reshape(-1, logits.size(-1)), flat_targets, ignore_index=IGNORE_INDEX
    )

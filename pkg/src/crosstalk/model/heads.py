"""
Output heads for the pre-training objectives.

All of them live in the ``heads`` checkpoint block. ``sai_bridge`` maps
backbone word vectors straight to width d when the SC-Encoder is bypassed.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from crosstalk.config import ModelConfig
from crosstalk.model.layers import swish


def restrict(logits: torch.Tensor, candidates: torch.Tensor) -> torch.Tensor:
    """
    Push logits of disallowed classes to the dtype minimum.

    Args:
        logits: (B, ..., C) scores
        candidates: (B, C) True for allowed classes
    """
    shape = [candidates.size(0)] + [1] * (logits.dim() - 2) + [candidates.size(1)]
    allowed = candidates.view(shape)
    return logits.masked_fill(~allowed, torch.finfo(logits.dtype).min)


class Bridge(nn.Module):
    """Swish(W e + b): backbone width to d."""

    def __init__(self, in_width: int, width: int) -> None:
        super().__init__()
        self.linear = nn.Linear(in_width, width)

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        return swish(self.linear(e))


class PretrainingHeads(nn.Module):
    def __init__(self, config: ModelConfig, backbone_width: int, vocab_size: int) -> None:
        super().__init__()
        d = config.hidden_size
        self.tlm = nn.Linear(backbone_width, vocab_size)
        self.hpsi = nn.Linear(backbone_width, 2)
        self.spi = nn.Linear(d, config.max_speakers + 1)
        self.uor = nn.Linear(d, config.max_utterances)
        self.sai_bridge = Bridge(backbone_width, d)

"""
Predicate-argument encoder and the role projection head.
"""

from __future__ import annotations

from typing import Optional

import torch
import torch.nn as nn

from crosstalk.config import ModelConfig
from crosstalk.model.layers import ConcatStack, swish


def pa_encode(
    g: torch.Tensor,
    p: torch.Tensor,
    stack: ConcatStack,
    mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """a^0 = g ⊕ p, then a^j = a^{j-1} ⊕ MTrans^j(a^{j-1})."""
    a = torch.cat([g, p], dim=-1)
    if a.size(-1) != stack.in_width:
        raise ValueError(f"Expected width {stack.in_width}, got {a.size(-1)}")
    return stack(a, mask)


class RoleProjection(nn.Module):
    """l = Swish(W^l a + b^l), one score per tag."""

    def __init__(self, in_width: int, num_tags: int) -> None:
        super().__init__()
        self.linear = nn.Linear(in_width, num_tags)

    @property
    def num_tags(self) -> int:
        return self.linear.out_features

    def forward(self, a: torch.Tensor) -> torch.Tensor:
        return swish(self.linear(a))


def role_project(a: torch.Tensor, projection: RoleProjection) -> torch.Tensor:
    return projection(a)


def label_distribution(l: torch.Tensor) -> torch.Tensor:  # noqa: E741
    """Per-word softmax over tags."""
    return torch.softmax(l, dim=-1)


class PredicateArgumentEncoder(nn.Module):
    """The PA-Encoder block: predicate embedding, MTrans stack and role projection."""

    def __init__(self, config: ModelConfig, num_tags: int) -> None:
        super().__init__()
        d = config.hidden_size
        self.predicate = nn.Embedding(2, config.predicate_dim)
        self.stack = ConcatStack(
            d + config.predicate_dim,
            d,
            config.pa_layers,
            config.heads,
            config.ffn_size,
            variant=config.variant,
            dropout=config.dropout,
            concat_norm=config.concat_norm,
        )
        self.projection = RoleProjection(self.stack.output_width, num_tags)

    def forward(
        self,
        g: torch.Tensor,
        word_predicate: torch.Tensor,
        mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """Tag logits l, (B, W, |L|)."""
        a = pa_encode(g, self.predicate(word_predicate), self.stack, mask)
        return role_project(a, self.projection)

"""
Contextual token encoder standing in for the cross-lingual language model.

A small Transformer trained from scratch. Word representations concatenate
the hidden states of the four top-most layers, so their width is 4h.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn

from crosstalk.config import ModelConfig
from crosstalk.model.layers import MTransLayer, MTransVariant
from crosstalk.model.vocab import TokenizedContext

TOP_LAYERS = 4


@dataclass(frozen=True)
class BackboneConfig:
    """Shape of the backbone encoder."""

    vocab_size: int
    layers: int = 4
    hidden: int = 32
    heads: int = 4
    max_len: int = 512
    dropout: float = 0.1
    word_pooling: str = "first"

    def __post_init__(self) -> None:
        if self.layers < TOP_LAYERS:
            raise ValueError(f"Backbone needs >= {TOP_LAYERS} layers, got {self.layers}")
        if self.hidden % self.heads:
            raise ValueError(f"hidden {self.hidden} is not divisible by {self.heads} heads")

    @classmethod
    def from_model_config(cls, config: ModelConfig, vocab_size: int) -> "BackboneConfig":
        return cls(
            vocab_size=vocab_size,
            layers=config.backbone_layers,
            hidden=config.backbone_hidden,
            heads=config.backbone_heads,
            max_len=config.max_len,
            dropout=config.dropout,
            word_pooling=config.word_pooling,
        )

    @property
    def output_width(self) -> int:
        return TOP_LAYERS * self.hidden


class Backbone(nn.Module):
    """Token + position embeddings followed by L_b standard encoder layers."""

    def __init__(self, config: BackboneConfig) -> None:
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(config.vocab_size, config.hidden, padding_idx=0)
        self.position_embedding = nn.Embedding(config.max_len, config.hidden)
        self.embedding_norm = nn.LayerNorm(config.hidden)
        self.dropout = nn.Dropout(config.dropout)
        self.layers = nn.ModuleList(
            MTransLayer(
                config.hidden,
                config.hidden,
                config.heads,
                4 * config.hidden,
                variant=MTransVariant.STANDARD,
                dropout=config.dropout,
            )
            for _ in range(config.layers)
        )

    @property
    def output_width(self) -> int:
        return self.config.output_width

    def forward(
        self,
        input_ids: torch.Tensor,
        attention_mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """
        Encode subtokens.

        Args:
            input_ids: (B, T) subtoken ids
            attention_mask: (B, T) True at real subtokens

        Returns:
            (B, T, 4h) concatenation of the top four layers' hidden states
        """
        length = input_ids.size(1)
        if length > self.config.max_len:
            raise ValueError(
                f"Sequence of {length} subtokens exceeds the positional table "
                f"({self.config.max_len})"
            )
        positions = torch.arange(length, device=input_ids.device)
        hidden = self.token_embedding(input_ids) + self.position_embedding(positions)[None]
        hidden = self.dropout(self.embedding_norm(hidden))

        states = []
        for layer in self.layers:
            hidden = layer(hidden, attention_mask)
            states.append(hidden)
        return torch.cat(states[-TOP_LAYERS:], dim=-1)

    def pool_words(
        self,
        subtokens: torch.Tensor,
        word_starts: torch.Tensor,
        subtoken_words: torch.Tensor,
        word_mask: torch.Tensor,
    ) -> torch.Tensor:
        """
        Reduce subtoken states to one row per word.

        Args:
            subtokens: (B, T, 4h) subtoken states
            word_starts: (B, W) index of each word's first subtoken
            subtoken_words: (B, T) word index per subtoken, -1 for specials/padding
            word_mask: (B, W) True at real words

        Returns:
            (B, W, 4h) word representations, zero at padded words
        """
        width = subtokens.size(-1)
        if self.config.word_pooling == "first":
            index = word_starts.unsqueeze(-1).expand(-1, -1, width)
            words = torch.gather(subtokens, 1, index)
        else:
            count = word_mask.size(1)
            member = subtoken_words.unsqueeze(1) == torch.arange(
                count, device=subtokens.device
            )[None, :, None]
            member = member.to(subtokens.dtype)
            totals = member.sum(-1, keepdim=True).clamp(min=1.0)
            words = (member @ subtokens) / totals
        return words * word_mask.unsqueeze(-1).to(words.dtype)


def encode(backbone: Backbone, ctx: TokenizedContext) -> torch.Tensor:
    """
    Word representations e for one context.

    Returns:
        (|S_w|, 4h) tensor, one row per word
    """
    device = next(backbone.parameters()).device
    input_ids = torch.tensor([ctx.input_ids], device=device)
    subtoken_words = torch.tensor([ctx.word_ids], device=device)
    word_starts = torch.tensor([ctx.word_starts()], device=device)
    word_mask = torch.ones(1, ctx.word_count, dtype=torch.bool, device=device)
    subtokens = backbone(input_ids)
    return backbone.pool_words(subtokens, word_starts, subtoken_words, word_mask)[0]

"""
Transformer building blocks: Swish, self-attention, the MTrans layer family
and the running-concatenation stack used by both hierarchical encoders.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F


def swish(x: torch.Tensor) -> torch.Tensor:
    """Swish(x) = x * sigmoid(x), elementwise."""
    return F.silu(x)


class MTransVariant(str, Enum):
    """Which residual connections concatenate instead of add."""

    STANDARD = "standard"
    MTRANS = "mtrans"
    LATER = "later-mtrans"
    BOTH = "both-mtrans"

    @property
    def concat_first(self) -> bool:
        return self in (MTransVariant.MTRANS, MTransVariant.BOTH)

    @property
    def concat_second(self) -> bool:
        return self in (MTransVariant.LATER, MTransVariant.BOTH)


class MultiHeadSelfAttention(nn.Module):
    """Scaled dot-product self-attention whose projections absorb any input width."""

    def __init__(self, in_width: int, width: int, heads: int, dropout: float = 0.1) -> None:
        super().__init__()
        if width % heads:
            raise ValueError(f"width {width} is not divisible by {heads} heads")
        self.heads = heads
        self.head_width = width // heads
        self.query = nn.Linear(in_width, width)
        self.key = nn.Linear(in_width, width)
        self.value = nn.Linear(in_width, width)
        self.output = nn.Linear(width, width)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        batch, length, _ = x.shape

        def split(t: torch.Tensor) -> torch.Tensor:
            return t.view(batch, length, self.heads, self.head_width).transpose(1, 2)

        q, k, v = split(self.query(x)), split(self.key(x)), split(self.value(x))
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_width)
        if mask is not None:
            scores = scores.masked_fill(~mask[:, None, None, :], float("-inf"))
        weights = self.dropout(torch.softmax(scores, dim=-1))
        context = (weights @ v).transpose(1, 2).reshape(batch, length, -1)
        return self.output(context)


class MTransLayer(nn.Module):
    """
    Post-norm Transformer encoder layer with optional Concat residuals.

    standard: Add / Add. mtrans: Concat / Add, the 2d-wide first residual is
    projected back to d on the skip path of the second sublayer.
    later-mtrans: Add / Concat. both-mtrans: Concat / Concat. A Concat second
    residual is normalized and projected back to d at the layer output
    (``concat_norm="wide"``), or projected first and normalized at d
    (``concat_norm="projected"``).

    Input width may differ from d; the output is always d wide.
    """

    def __init__(
        self,
        in_width: int,
        width: int,
        heads: int,
        ffn_width: int,
        variant: MTransVariant | str = MTransVariant.MTRANS,
        dropout: float = 0.1,
        concat_norm: str = "wide",
    ) -> None:
        super().__init__()
        self.variant = MTransVariant(variant)
        self.in_width = in_width
        self.width = width
        self.concat_norm = concat_norm

        self.attention = MultiHeadSelfAttention(in_width, width, heads, dropout)
        self.input_proj = nn.Linear(in_width, width) if in_width != width else nn.Identity()

        first_width = 2 * width if self.variant.concat_first else width
        self.norm1 = nn.LayerNorm(first_width)
        self.feed_forward = nn.Sequential(
            nn.Linear(first_width, ffn_width),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(ffn_width, width),
        )

        if self.variant.concat_second:
            wide = first_width + width
            self.skip_proj: nn.Module = nn.Identity()
            self.output_proj: nn.Module = nn.Linear(wide, width)
            self.norm2 = nn.LayerNorm(wide if concat_norm == "wide" else width)
        else:
            self.skip_proj = (
                nn.Linear(first_width, width) if self.variant.concat_first else nn.Identity()
            )
            self.output_proj = nn.Identity()
            self.norm2 = nn.LayerNorm(width)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        if x.size(-1) != self.in_width:
            raise ValueError(f"Expected input width {self.in_width}, got {x.size(-1)}")

        attended = self.dropout(self.attention(x, mask))
        residual = self.input_proj(x)
        if self.variant.concat_first:
            hidden = self.norm1(torch.cat([residual, attended], dim=-1))
        else:
            hidden = self.norm1(residual + attended)

        transformed = self.dropout(self.feed_forward(hidden))
        if not self.variant.concat_second:
            return self.norm2(self.skip_proj(hidden) + transformed)

        joined = torch.cat([hidden, transformed], dim=-1)
        if self.concat_norm == "wide":
            return self.output_proj(self.norm2(joined))
        return self.norm2(self.output_proj(joined))


def mtrans_forward(
    x: torch.Tensor,
    layer: MTransLayer,
    mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Apply one MTrans layer: (..., |S_w|, w) -> (..., |S_w|, d)."""
    squeeze = x.dim() == 2
    if squeeze:
        x = x.unsqueeze(0)
        mask = mask.unsqueeze(0) if mask is not None else None
    out = layer(x, mask)
    return out.squeeze(0) if squeeze else out


class ConcatStack(nn.Module):
    """
    x^j = x^{j-1} ⊕ MTrans^j(x^{j-1}) for j = 1..N.

    The output width is ``in_width + N * width``; with N = 0 the input passes
    through untouched.
    """

    def __init__(
        self,
        in_width: int,
        width: int,
        num_layers: int,
        heads: int,
        ffn_width: int,
        variant: MTransVariant | str = MTransVariant.MTRANS,
        dropout: float = 0.1,
        concat_norm: str = "wide",
    ) -> None:
        super().__init__()
        if num_layers < 0:
            raise ValueError(f"num_layers must be >= 0, got {num_layers}")
        self.in_width = in_width
        self.output_width = in_width + num_layers * width
        self.layers = nn.ModuleList(
            MTransLayer(
                in_width + j * width,
                width,
                heads,
                ffn_width,
                variant=variant,
                dropout=dropout,
                concat_norm=concat_norm,
            )
            for j in range(num_layers)
        )

    def forward(self, x: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        for layer in self.layers:
            x = torch.cat([x, layer(x, mask)], dim=-1)
        return x

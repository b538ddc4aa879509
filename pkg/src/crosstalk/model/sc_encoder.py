"""
Structure-aware conversation encoder.

Words carry the backbone representation plus turn and speaker embeddings
through a running-concatenation MTrans stack. Utterances are max-pooled
from their words, contextualized by a stacked Bi-LSTM, and fused back into
every word of the utterance.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Tuple

import torch
import torch.nn as nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from crosstalk.config import ModelConfig
from crosstalk.model.batching import ContextBatch
from crosstalk.model.layers import ConcatStack, swish

MASKED_SPEAKER = 0


class IndicatorEmbeddings(nn.Module):
    """
    Speaker and turn lookup tables.

    Speaker ids start at 1; row 0 is the mask tag substituted by speaker
    identification. The predicate table lives with the predicate-argument
    encoder.
    """

    def __init__(self, max_speakers: int, speaker_dim: int, max_turns: int, turn_dim: int):
        super().__init__()
        self.speaker = nn.Embedding(max_speakers + 1, speaker_dim)
        self.turn = nn.Embedding(max_turns, turn_dim)

    def forward(
        self, turns: torch.Tensor, speakers: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.turn(turns), self.speaker(speakers)


def word_level_encode(
    e: torch.Tensor,
    t: torch.Tensor,
    r: torch.Tensor,
    stack: ConcatStack,
    mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """s^0 = e ⊕ t ⊕ r, then s^j = s^{j-1} ⊕ MTrans^j(s^{j-1})."""
    return stack(torch.cat([e, t, r], dim=-1), mask)


def utterance_pool(
    s: torch.Tensor,
    word_utterances: torch.Tensor,
    word_mask: Optional[torch.Tensor] = None,
    utterance_mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Max-pool word vectors per utterance.

    Accepts a single context ``(W, width)`` with ``(W,)`` utterance ids, or a
    batch ``(B, W, width)`` with ``(B, W)`` ids and masks.

    Returns:
        (N, width) or (B, N, width); padded utterances are zero

    Raises:
        ValueError: When a real utterance owns no word
    """
    unbatched = s.dim() == 2
    if unbatched:
        s = s.unsqueeze(0)
        word_utterances = word_utterances.unsqueeze(0)
    if word_mask is None:
        word_mask = torch.ones(word_utterances.shape, dtype=torch.bool, device=s.device)
    elif unbatched:
        word_mask = word_mask.unsqueeze(0)

    if utterance_mask is None:
        count = int(word_utterances[word_mask].max()) + 1 if word_mask.any() else 0
        utterance_mask = torch.ones(s.size(0), count, dtype=torch.bool, device=s.device)
    elif unbatched:
        utterance_mask = utterance_mask.unsqueeze(0)
    count = utterance_mask.size(1)
    batch, _, width = s.shape

    # padded words go to a spare slot at index ``count``
    index = word_utterances.masked_fill(~word_mask, count).clamp(max=count)
    sizes = torch.zeros(batch, count + 1, device=s.device).scatter_add(
        1, index, torch.ones(index.shape, device=s.device)
    )
    if (utterance_mask & (sizes[:, :count] == 0)).any():
        raise ValueError("Cannot pool an utterance with no words")

    fill = s.new_full((batch, count + 1, width), torch.finfo(s.dtype).min)
    pooled = fill.scatter_reduce(
        1, index.unsqueeze(-1).expand(-1, -1, width), s, reduce="amax", include_self=True
    )[:, :count]
    pooled = pooled.masked_fill(~utterance_mask.unsqueeze(-1), 0.0)
    return pooled.squeeze(0) if unbatched else pooled


class UtteranceEncoder(nn.Module):
    """Stacked Bi-LSTM over utterance vectors; both directions projected to d."""

    def __init__(self, in_width: int, width: int, num_layers: int = 2, dropout: float = 0.1):
        super().__init__()
        self.lstm = nn.LSTM(
            in_width,
            width,
            num_layers=num_layers,
            batch_first=True,
            bidirectional=True,
            dropout=dropout if num_layers > 1 else 0.0,
        )
        self.combine = nn.Linear(2 * width, width)

    def forward(self, u: torch.Tensor, lengths: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Args:
            u: (B, N, in_width) or (N, in_width)
            lengths: (B,) number of real utterances per row

        Returns:
            u' with the same leading shape and width d
        """
        unbatched = u.dim() == 2
        if unbatched:
            u = u.unsqueeze(0)
        if lengths is None:
            states, _ = self.lstm(u)
        else:
            packed = pack_padded_sequence(
                u, lengths.cpu(), batch_first=True, enforce_sorted=False
            )
            packed_states, _ = self.lstm(packed)
            states, _ = pad_packed_sequence(
                packed_states, batch_first=True, total_length=u.size(1)
            )
        out = self.combine(states)
        return out.squeeze(0) if unbatched else out


def utterance_seq_encode(
    u: torch.Tensor,
    encoder: UtteranceEncoder,
    lengths: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    return encoder(u, lengths)


class FusionLayer(nn.Module):
    """g_k^i = Swish(W^g [s_(i,k) ⊕ u'_i] + b^g)."""

    def __init__(self, word_width: int, width: int) -> None:
        super().__init__()
        self.word_width = word_width
        self.width = width
        self.linear = nn.Linear(word_width + width, width)

    def forward(
        self,
        s: torch.Tensor,
        u_prime: torch.Tensor,
        word_utterances: torch.Tensor,
    ) -> torch.Tensor:
        if s.size(-1) != self.word_width or u_prime.size(-1) != self.width:
            raise ValueError(
                f"Fusion expects widths ({self.word_width}, {self.width}), "
                f"got ({s.size(-1)}, {u_prime.size(-1)})"
            )
        unbatched = s.dim() == 2
        if unbatched:
            s, u_prime, word_utterances = (
                s.unsqueeze(0),
                u_prime.unsqueeze(0),
                word_utterances.unsqueeze(0),
            )
        index = word_utterances.unsqueeze(-1).expand(-1, -1, self.width)
        broadcast = torch.gather(u_prime, 1, index)
        g = swish(self.linear(torch.cat([s, broadcast], dim=-1)))
        return g.squeeze(0) if unbatched else g


def fuse(
    s: torch.Tensor,
    u_prime: torch.Tensor,
    word_utterances: torch.Tensor,
    layer: FusionLayer,
) -> torch.Tensor:
    return layer(s, u_prime, word_utterances)


class ScOutput(NamedTuple):
    words: torch.Tensor  # g, (B, W, d)
    utterances: torch.Tensor  # u', (B, N, d)


class StructureAwareEncoder(nn.Module):
    """The SC-Encoder block: indicators, word stack, utterance encoder and fusion."""

    def __init__(self, config: ModelConfig, input_width: int) -> None:
        super().__init__()
        d = config.hidden_size
        self.indicators = IndicatorEmbeddings(
            config.max_speakers, config.speaker_dim, config.max_turns, config.turn_dim
        )
        self.word_stack = ConcatStack(
            input_width + config.turn_dim + config.speaker_dim,
            d,
            config.word_layers,
            config.heads,
            config.ffn_size,
            variant=config.variant,
            dropout=config.dropout,
            concat_norm=config.concat_norm,
        )
        self.utterance_encoder = UtteranceEncoder(
            self.word_stack.output_width, d, config.utterance_layers, config.dropout
        )
        self.fusion = FusionLayer(self.word_stack.output_width, d)

    def forward(self, e: torch.Tensor, batch: ContextBatch) -> ScOutput:
        t, r = self.indicators(batch.word_turns, batch.word_speakers)
        s = word_level_encode(e, t, r, self.word_stack, batch.word_mask)
        u = utterance_pool(s, batch.word_utterances, batch.word_mask, batch.utterance_mask)
        u_prime = utterance_seq_encode(u, self.utterance_encoder, batch.utterance_lengths)
        g = fuse(s, u_prime, batch.word_utterances, self.fusion)
        return ScOutput(words=g, utterances=u_prime)

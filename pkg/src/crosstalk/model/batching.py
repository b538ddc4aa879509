"""
Padding of tokenized contexts and sentence pairs into tensor batches.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Sequence

import torch

from crosstalk.model.vocab import TokenizedContext

IGNORE_INDEX = -100


def pad_sequences(
    rows: Sequence[Sequence[int]],
    value: int = 0,
    length: Optional[int] = None,
) -> torch.Tensor:
    """Right-pad integer rows into a (B, L) long tensor."""
    width = length if length is not None else max((len(r) for r in rows), default=0)
    out = torch.full((len(rows), width), value, dtype=torch.long)
    for i, row in enumerate(rows):
        row = list(row)[:width]
        if row:
            out[i, : len(row)] = torch.tensor(row, dtype=torch.long)
    return out


@dataclass
class ContextBatch:
    """
    A padded batch of dialogue contexts.

    Subtoken tensors are (B, T), word tensors (B, W), utterance tensors
    (B, N). Optional targets use ``IGNORE_INDEX`` at undefined positions.
    """

    input_ids: torch.Tensor
    attention_mask: torch.Tensor
    subtoken_words: torch.Tensor
    word_starts: torch.Tensor
    word_mask: torch.Tensor
    word_utterances: torch.Tensor
    word_turns: torch.Tensor
    word_speakers: torch.Tensor
    word_predicate: torch.Tensor
    utterance_mask: torch.Tensor
    tags: Optional[torch.Tensor] = None
    utterance_targets: Optional[torch.Tensor] = None
    candidates: Optional[torch.Tensor] = None

    @property
    def size(self) -> int:
        return self.input_ids.size(0)

    @property
    def utterance_lengths(self) -> torch.Tensor:
        return self.utterance_mask.sum(-1)

    def to(self, device: torch.device | str) -> "ContextBatch":
        moved = {}
        for f in fields(self):
            value = getattr(self, f.name)
            moved[f.name] = value.to(device) if value is not None else None
        return ContextBatch(**moved)


def collate(
    contexts: Sequence[TokenizedContext],
    pad_id: int = 0,
    max_speakers: Optional[int] = None,
    tags: Optional[Sequence[Sequence[int]]] = None,
    utterance_targets: Optional[Sequence[Sequence[int]]] = None,
    candidates: Optional[Sequence[Sequence[int]]] = None,
    candidate_count: Optional[int] = None,
) -> ContextBatch:
    """
    Pad contexts into a ContextBatch.

    Args:
        contexts: Tokenized contexts, one per example
        pad_id: Subtoken id used for padding
        max_speakers: Speaker ids above this are clipped to it
        tags: Per-word targets (already aligned to each context's words)
        utterance_targets: Per-utterance targets
        candidates: Allowed class ids per example for utterance-level heads
        candidate_count: Number of classes of the head the candidates index

    Returns:
        ContextBatch on the CPU
    """
    if not contexts:
        raise ValueError("Cannot collate an empty batch")

    speakers = [list(c.word_speakers) for c in contexts]
    if max_speakers is not None:
        speakers = [[min(s, max_speakers) for s in row] for row in speakers]

    input_ids = pad_sequences([c.input_ids for c in contexts], pad_id)
    word_counts = torch.tensor([c.word_count for c in contexts])
    utterance_counts = torch.tensor([c.utterance_count for c in contexts])
    word_width = int(word_counts.max())
    utterance_width = int(utterance_counts.max())

    batch = ContextBatch(
        input_ids=input_ids,
        attention_mask=pad_sequences([[1] * len(c.input_ids) for c in contexts]).bool(),
        subtoken_words=pad_sequences([c.word_ids for c in contexts], -1),
        word_starts=pad_sequences([c.word_starts() for c in contexts], 0, word_width),
        word_mask=torch.arange(word_width)[None, :] < word_counts[:, None],
        word_utterances=pad_sequences([c.word_utterances for c in contexts], 0, word_width),
        word_turns=pad_sequences([c.word_turns for c in contexts], 0, word_width),
        word_speakers=pad_sequences(speakers, 0, word_width),
        word_predicate=pad_sequences([c.word_predicate for c in contexts], 0, word_width),
        utterance_mask=torch.arange(utterance_width)[None, :] < utterance_counts[:, None],
    )
    if tags is not None:
        batch.tags = pad_sequences(tags, IGNORE_INDEX, word_width)
    if utterance_targets is not None:
        batch.utterance_targets = pad_sequences(utterance_targets, IGNORE_INDEX, utterance_width)
    if candidates is not None:
        if candidate_count is None:
            raise ValueError("candidate_count is required with candidates")
        allowed = torch.zeros(len(contexts), candidate_count, dtype=torch.bool)
        for i, row in enumerate(candidates):
            allowed[i, [c for c in row if 0 <= c < candidate_count]] = True
        batch.candidates = allowed
    return batch


@dataclass
class PairBatch:
    """A padded batch of ``[CLS] a [SEP] b [SEP]`` sequences."""

    input_ids: torch.Tensor
    attention_mask: torch.Tensor
    targets: Optional[torch.Tensor] = None  # (B, T) token targets
    labels: Optional[torch.Tensor] = None  # (B,) sequence labels

    @property
    def size(self) -> int:
        return self.input_ids.size(0)

    def to(self, device: torch.device | str) -> "PairBatch":
        return PairBatch(
            input_ids=self.input_ids.to(device),
            attention_mask=self.attention_mask.to(device),
            targets=self.targets.to(device) if self.targets is not None else None,
            labels=self.labels.to(device) if self.labels is not None else None,
        )


def collate_pairs(
    sequences: Sequence[Sequence[int]],
    pad_id: int = 0,
    max_len: Optional[int] = None,
    targets: Optional[Sequence[Sequence[int]]] = None,
    labels: Optional[Sequence[int]] = None,
) -> PairBatch:
    """Pad serialized pairs, truncating to ``max_len`` subtokens when given."""
    if not sequences:
        raise ValueError("Cannot collate an empty batch")
    width = max(len(s) for s in sequences)
    if max_len is not None:
        width = min(width, max_len)
    lengths = torch.tensor([min(len(s), width) for s in sequences])
    return PairBatch(
        input_ids=pad_sequences(sequences, pad_id, width),
        attention_mask=torch.arange(width)[None, :] < lengths[:, None],
        targets=pad_sequences(targets, IGNORE_INDEX, width) if targets is not None else None,
        labels=torch.tensor(list(labels), dtype=torch.long) if labels is not None else None,
    )

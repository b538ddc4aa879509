"""
Turn objective examples and annotated frames into model batches.
"""

from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

from crosstalk.config import ModelConfig
from crosstalk.corpus.codec import bio_encode
from crosstalk.model.batching import IGNORE_INDEX, ContextBatch, PairBatch, collate, collate_pairs
from crosstalk.model.vocab import Vocabulary, tokenize_context
from crosstalk.models import Dialogue, Frame, LabelInventory
from crosstalk.objectives.dialogue import SpiExample, UorExample
from crosstalk.objectives.hpsi import HpsiExample
from crosstalk.objectives.sai import SaiExample
from crosstalk.objectives.tlm import TlmExample

logger = logging.getLogger(__name__)

FrameItem = Tuple[Dialogue, Frame]


def tlm_batch(examples: Sequence[TlmExample], vocab: Vocabulary, max_len: int) -> PairBatch:
    return collate_pairs(
        [e.input_ids for e in examples],
        vocab.pad_id,
        max_len,
        targets=[e.target_row() for e in examples],
    )


def hpsi_batch(examples: Sequence[HpsiExample], vocab: Vocabulary, max_len: int) -> PairBatch:
    return collate_pairs(
        [vocab.encode_pair(e.first, e.second)[0] for e in examples],
        vocab.pad_id,
        max_len,
        labels=[e.label for e in examples],
    )


def spi_batch(
    examples: Sequence[SpiExample], vocab: Vocabulary, config: ModelConfig
) -> ContextBatch:
    """Masked-speaker targets per unit, restricted to the speakers of each dialogue."""
    contexts, targets, candidates = [], [], []
    for example in examples:
        ctx = tokenize_context(
            example.dialogue,
            None,
            config.max_len,
            vocab,
            speaker_ids=example.speaker_ids,
            max_turns=config.max_turns,
        )
        gold = dict(zip(example.masked, example.targets))
        contexts.append(ctx)
        targets.append(
            [
                min(gold[u], config.max_speakers) if u in gold else IGNORE_INDEX
                for u in ctx.utterance_indices
            ]
        )
        candidates.append(
            sorted({min(s, config.max_speakers) for s in example.dialogue.speaker_ids()})
        )
    return collate(
        contexts,
        vocab.pad_id,
        config.max_speakers,
        utterance_targets=targets,
        candidates=candidates,
        candidate_count=config.max_speakers + 1,
    )


def uor_batch(
    examples: Sequence[UorExample], vocab: Vocabulary, config: ModelConfig
) -> ContextBatch:
    """
    Original-position targets for the shuffled suffix.

    Positions are counted within the kept window, so utterances dropped by
    truncation shift every target down by the same offset.
    """
    contexts, targets, candidates = [], [], []
    for example in examples:
        ctx = tokenize_context(
            example.dialogue, None, config.max_len, vocab, max_turns=config.max_turns
        )
        offset = ctx.utterance_indices[0]
        row: List[int] = []
        for position in ctx.utterance_indices:
            target = example.order[position] - offset
            if position >= example.start and 0 <= target < config.max_utterances:
                row.append(target)
            else:
                row.append(IGNORE_INDEX)
        contexts.append(ctx)
        targets.append(row)
        first = max(example.start - offset, 0)
        candidates.append(list(range(first, len(example.order) - offset)))
    return collate(
        contexts,
        vocab.pad_id,
        config.max_speakers,
        utterance_targets=targets,
        candidates=candidates,
        candidate_count=config.max_utterances,
    )


def sai_batch(
    examples: Sequence[SaiExample], vocab: Vocabulary, config: ModelConfig
) -> ContextBatch:
    contexts = [
        tokenize_context(e.dialogue, e.frame, config.max_len, vocab, max_turns=config.max_turns)
        for e in examples
    ]
    return collate(
        contexts,
        vocab.pad_id,
        config.max_speakers,
        tags=[list(e.tags.tags) for e in examples],
    )


def frame_batch(
    items: Sequence[FrameItem],
    vocab: Vocabulary,
    config: ModelConfig,
    inventory: LabelInventory,
    with_tags: bool = True,
) -> ContextBatch:
    """
    Batch CSRL frames, each over its own context window.

    Tags of words in utterances dropped by truncation are removed from the
    supervision together with those utterances.
    """
    contexts, tags = [], []
    for dialogue, frame in items:
        ctx = tokenize_context(dialogue, frame, config.max_len, vocab, max_turns=config.max_turns)
        contexts.append(ctx)
        if with_tags:
            full = bio_encode(frame, dialogue, inventory).tags
            if ctx.dropped_words:
                lost = sum(
                    1 for a in frame.arguments if a.span.utterance < ctx.utterance_indices[0]
                )
                if lost:
                    logger.warning(
                        f"Dialogue {dialogue.id}: {lost} arguments fall outside the "
                        f"context window and are not supervised"
                    )
            tags.append(list(full[ctx.dropped_words :]))
    return collate(
        contexts,
        vocab.pad_id,
        config.max_speakers,
        tags=tags if with_tags else None,
    )

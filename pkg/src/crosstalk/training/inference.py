"""
Frame prediction and dev/test evaluation with a trained model.
"""

from __future__ import annotations

import logging
from typing import List, Sequence, Set, Tuple

import torch

from crosstalk.config import ModelConfig
from crosstalk.evaluation.predictions import PredictionKey, gold_tuples
from crosstalk.evaluation.scoring import (
    ScoreReport,
    extract_tuples,
    frame_key,
    frame_tuples,
    score,
)
from crosstalk.model.batching import collate
from crosstalk.model.csrl import CsrlModel
from crosstalk.model.vocab import Vocabulary, tokenize_context
from crosstalk.models import AnnotatedDialogue, Argument, Frame, LabelInventory, SemanticTuple

logger = logging.getLogger(__name__)


def predict(
    model: CsrlModel,
    dataset: Sequence[AnnotatedDialogue],
    vocab: Vocabulary,
    inventory: LabelInventory,
    config: ModelConfig,
    batch_size: int = 24,
) -> List[Tuple[PredictionKey, Frame]]:
    """
    Predict the arguments of every frame of ``dataset``.

    Gold arguments are ignored; only each frame's predicate is used.

    Returns:
        ((dialogue id, frame index), predicted Frame) in dataset order
    """
    items = [
        (item.dialogue, i, frame) for item in dataset for i, frame in enumerate(item.frames)
    ]
    was_training = model.training
    model.eval()
    predictions: List[Tuple[PredictionKey, Frame]] = []
    try:
        for begin in range(0, len(items), batch_size):
            chunk = items[begin : begin + batch_size]
            contexts = [
                tokenize_context(d, f, config.max_len, vocab, max_turns=config.max_turns)
                for d, _, f in chunk
            ]
            batch = collate(contexts, vocab.pad_id, config.max_speakers).to(model.device)
            tags = model.predict_tags(batch).cpu()
            for row, ((dialogue, index, frame), ctx) in enumerate(zip(chunk, contexts)):
                found = extract_tuples(
                    tags[row, : ctx.word_count].tolist(),
                    frame_key(dialogue.id, index),
                    frame.predicate,
                    ctx.word_positions(dialogue),
                    inventory,
                )
                arguments = tuple(Argument(t.argument, t.role) for t in sorted(found))
                predictions.append(
                    ((dialogue.id, index), Frame(predicate=frame.predicate, arguments=arguments))
                )
    finally:
        model.train(was_training)
    logger.debug(f"Predicted {len(predictions)} frames")
    return predictions


@torch.no_grad()
def evaluate(
    model: CsrlModel,
    dataset: Sequence[AnnotatedDialogue],
    vocab: Vocabulary,
    inventory: LabelInventory,
    config: ModelConfig,
    batch_size: int = 24,
) -> ScoreReport:
    """Score model predictions on ``dataset`` against its gold frames."""
    predicted: Set[SemanticTuple] = set()
    for (dialogue_id, index), frame in predict(
        model, dataset, vocab, inventory, config, batch_size
    ):
        predicted |= frame_tuples(frame_key(dialogue_id, index), frame)
    return score(gold_tuples(dataset), predicted)

"""
Dataset statistics for CSRL corpora.
"""

from __future__ import annotations

from typing import Iterable

from crosstalk.models import AnnotatedDialogue, DatasetStats


def compute_stats(dataset: Iterable[AnnotatedDialogue]) -> DatasetStats:
    """
    Count dialogues, utterances, predicates and cross-turn arguments.

    An argument is cross-turn when its utterance differs from the
    predicate's. An empty dataset yields all zeros, including the ratio.

    Args:
        dataset: Validated annotated dialogues

    Returns:
        DatasetStats for the whole dataset
    """
    dialogues = utterances = tokens = predicates = arguments = cross = 0
    for item in dataset:
        dialogues += 1
        utterances += len(item.dialogue.utterances)
        tokens += item.dialogue.token_count()
        predicates += len(item.frames)
        for frame in item.frames:
            arguments += len(frame.arguments)
            cross += sum(
                1 for a in frame.arguments if a.span.utterance != frame.predicate.utterance
            )

    return DatasetStats(
        dialogues=dialogues,
        utterances=utterances,
        predicates=predicates,
        arguments=arguments,
        cross_arguments=cross,
        mean_tokens_per_utterance=tokens / utterances if utterances else 0.0,
    )

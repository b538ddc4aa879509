"""
Dialogue-structure objectives: speaker identification and utterance order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from crosstalk.model.sc_encoder import MASKED_SPEAKER
from crosstalk.models import Dialogue, Utterance

SENTENCE_FINAL = (".", "?", "!", "。", "？", "！", "…")


def _check_ratio(name: str, value: float) -> None:
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name} must be in [0, 100], got {value}")


def ratio_count(ratio: float, total: int) -> int:
    """ceil(ratio% of total), computed as ceil(ratio * total / 100)."""
    return min(total, math.ceil(ratio * total / 100.0))


def alternates(dialogue: Dialogue) -> bool:
    """True when exactly two speakers take strictly alternating turns."""
    if len(dialogue.speakers) != 2:
        return False
    return all(
        a.speaker != b.speaker for a, b in zip(dialogue.utterances, dialogue.utterances[1:])
    )


def split_clauses(utterance: Utterance) -> List[Tuple[str, ...]]:
    """Split an utterance's tokens after every sentence-final mark."""
    clauses: List[Tuple[str, ...]] = []
    current: List[str] = []
    for token in utterance.tokens:
        current.append(token)
        if token.endswith(SENTENCE_FINAL):
            clauses.append(tuple(current))
            current = []
    if current:
        clauses.append(tuple(current))
    return clauses


def clause_units(dialogue: Dialogue) -> Dialogue:
    """Re-segment a dialogue into clauses, one utterance each, turns renumbered from 1."""
    pieces = [(u.speaker, clause) for u in dialogue.utterances for clause in split_clauses(u)]
    return Dialogue(
        id=dialogue.id,
        language=dialogue.language,
        utterances=tuple(
            Utterance(speaker=speaker, turn=i + 1, tokens=clause)
            for i, (speaker, clause) in enumerate(pieces)
        ),
    )


@dataclass(frozen=True)
class SpiExample:
    """
    A dialogue whose masked units carry the mask speaker id.

    ``speaker_ids`` is the model input (one id per unit); ``targets`` holds
    the gold id of each unit in ``masked``.
    """

    dialogue: Dialogue
    speaker_ids: Tuple[int, ...]
    masked: Tuple[int, ...]
    targets: Tuple[int, ...]
    clauses: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.dialogue.id,
            "units": [list(u.tokens) for u in self.dialogue.utterances],
            "speaker_ids": list(self.speaker_ids),
            "masked": list(self.masked),
            "targets": list(self.targets),
            "clauses": self.clauses,
        }


def spi_corrupt(dialogue: Dialogue, k1: float, rng: np.random.Generator) -> SpiExample:
    """
    Mask the speaker indicator of ceil(K1% of units) units.

    Units are clauses when exactly two speakers strictly alternate,
    utterances otherwise.

    Args:
        dialogue: Source dialogue
        k1: Percentage of units to mask, in [0, 100]
        rng: Random generator

    Returns:
        SpiExample over the chosen units
    """
    _check_ratio("K1", k1)
    clauses = alternates(dialogue)
    units = clause_units(dialogue) if clauses else dialogue
    gold = units.speaker_ids()

    count = ratio_count(k1, len(gold))
    masked = sorted(int(i) for i in rng.choice(len(gold), size=count, replace=False))
    speaker_ids = list(gold)
    for i in masked:
        speaker_ids[i] = MASKED_SPEAKER
    return SpiExample(
        dialogue=units,
        speaker_ids=tuple(speaker_ids),
        masked=tuple(masked),
        targets=tuple(gold[i] for i in masked),
        clauses=clauses,
    )


@dataclass(frozen=True)
class UorExample:
    """
    A dialogue whose last utterances were shuffled.

    ``order[i]`` is the original index of the utterance now at position i;
    positions from ``start`` on form the shuffled suffix.
    """

    dialogue: Dialogue
    order: Tuple[int, ...]
    start: int

    @property
    def targets(self) -> Tuple[int, ...]:
        return self.order[self.start :]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.dialogue.id,
            "utterances": [list(u.tokens) for u in self.dialogue.utterances],
            "order": list(self.order),
            "start": self.start,
        }


def uor_shuffle(dialogue: Dialogue, k2: float, rng: np.random.Generator) -> UorExample:
    """
    Shuffle the last ceil(K2% of N) utterances.

    Utterances keep their speaker; turn indices are renumbered 1..N so the
    turn indicator does not reveal the original order.

    Args:
        dialogue: Source dialogue
        k2: Percentage of utterances to shuffle, in [0, 100]
        rng: Random generator

    Returns:
        UorExample with the permuted dialogue and original indices
    """
    _check_ratio("K2", k2)
    total = len(dialogue.utterances)
    start = total - ratio_count(k2, total)
    suffix = [start + int(i) for i in rng.permutation(total - start)]
    order = tuple(range(start)) + tuple(suffix)
    utterances = tuple(
        Utterance(
            speaker=dialogue.utterances[j].speaker,
            turn=i + 1,
            tokens=dialogue.utterances[j].tokens,
        )
        for i, j in enumerate(order)
    )
    return UorExample(
        dialogue=Dialogue(id=dialogue.id, utterances=utterances, language=dialogue.language),
        order=order,
        start=start,
    )

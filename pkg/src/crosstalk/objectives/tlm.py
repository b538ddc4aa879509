"""
Translation language modeling: masked-token prediction over a parallel pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from crosstalk.model.batching import IGNORE_INDEX
from crosstalk.model.vocab import Vocabulary
from crosstalk.models import ParallelPair


@dataclass(frozen=True)
class TlmExample:
    """
    A corrupted ``[CLS] source [SEP] target [SEP]`` sequence.

    ``targets[i]`` is the original id at ``positions[i]``.
    """

    input_ids: Tuple[int, ...]
    positions: Tuple[int, ...]
    targets: Tuple[int, ...]

    def target_row(self) -> List[int]:
        """Per-subtoken targets with IGNORE_INDEX outside the selected positions."""
        row = [IGNORE_INDEX] * len(self.input_ids)
        for position, target in zip(self.positions, self.targets):
            row[position] = target
        return row

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_ids": list(self.input_ids),
            "positions": list(self.positions),
            "targets": list(self.targets),
        }


def tlm_corrupt(
    pair: ParallelPair,
    vocab: Vocabulary,
    mask_rate: float,
    rng: np.random.Generator,
) -> TlmExample:
    """
    Select each non-special subtoken with probability ``mask_rate`` and corrupt it.

    A selected subtoken becomes ``[MASK]`` 80% of the time, a random token
    10% of the time and stays unchanged otherwise; it is a target in all
    three cases.

    Args:
        pair: Parallel sentence pair
        vocab: Vocabulary for serialization and random replacements
        mask_rate: Selection probability per subtoken
        rng: Random generator

    Returns:
        TlmExample with targets exactly at the selected positions
    """
    if not pair.source or not pair.target:
        raise ValueError("TLM needs a non-empty sentence pair")
    if not 0.0 <= mask_rate <= 1.0:
        raise ValueError(f"mask_rate must be in [0, 1], got {mask_rate}")

    ids, word_ids = vocab.encode_pair(pair.source, pair.target)
    corrupted = list(ids)
    positions: List[int] = []
    targets: List[int] = []
    for position, (token, word) in enumerate(zip(ids, word_ids)):
        if word < 0 or rng.random() >= mask_rate:
            continue
        positions.append(position)
        targets.append(token)
        roll = rng.random()
        if roll < 0.8:
            corrupted[position] = vocab.mask_id
        elif roll < 0.9:
            corrupted[position] = vocab.random_id(rng)
    return TlmExample(
        input_ids=tuple(corrupted), positions=tuple(positions), targets=tuple(targets)
    )

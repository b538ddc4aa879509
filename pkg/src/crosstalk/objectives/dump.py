"""
Dump mode: write generated objective examples as JSON lines.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Protocol, Sequence

from crosstalk.model.vocab import Vocabulary
from crosstalk.models import AnnotatedDialogue, ParallelPair
from crosstalk.objectives.dialogue import spi_corrupt, uor_shuffle
from crosstalk.objectives.hpsi import HpsiSampler
from crosstalk.objectives.losses import ObjectiveId
from crosstalk.objectives.sai import sai_build
from crosstalk.objectives.sampling import derive_rng
from crosstalk.objectives.tlm import tlm_corrupt

logger = logging.getLogger(__name__)


class Dumpable(Protocol):
    def to_dict(self) -> Any: ...


def build_examples(
    objective: ObjectiveId | str,
    data: Sequence[Any],
    count: int,
    seed: int,
    mask_rate: float = 0.15,
    spi_ratio: float = 30.0,
    uor_ratio: float = 50.0,
) -> List[Dumpable]:
    """
    Generate ``count`` examples for one pre-training objective.

    Args:
        objective: Which builder to run
        data: ParallelPairs for tlm/hpsi, AnnotatedDialogues for spi/uor/sai
        count: Number of examples (sources are cycled in order)
        seed: Run seed; the builder stream is derived from it
        mask_rate: TLM selection probability
        spi_ratio: K1
        uor_ratio: K2

    Returns:
        Generated examples
    """
    objective = ObjectiveId(objective)
    if not data:
        raise ValueError(f"No source data to build {objective.value} examples from")
    rng = derive_rng(seed, list(ObjectiveId).index(objective))
    examples: List[Dumpable] = []

    if objective in (ObjectiveId.TLM, ObjectiveId.HPSI):
        pairs: Sequence[ParallelPair] = data
        if objective == ObjectiveId.TLM:
            vocab = Vocabulary.build(s for p in pairs for s in (p.source, p.target))
            for i in range(count):
                examples.append(tlm_corrupt(pairs[i % len(pairs)], vocab, mask_rate, rng))
        else:
            sampler = HpsiSampler(pairs)
            for i in range(count):
                examples.append(sampler.sample(rng, pairs[i % len(pairs)]))
        return examples

    items: Sequence[AnnotatedDialogue] = data
    for i in range(count):
        item = items[i % len(items)]
        if objective == ObjectiveId.SPI:
            examples.append(spi_corrupt(item.dialogue, spi_ratio, rng))
        elif objective == ObjectiveId.UOR:
            examples.append(uor_shuffle(item.dialogue, uor_ratio, rng))
        elif objective == ObjectiveId.SAI:
            examples.append(sai_build(item))
        else:
            raise ValueError(f"{objective.value} is not a pre-training objective")
    return examples


def dump_examples(examples: Iterable[Dumpable], path: str | Path) -> int:
    """Write one JSON object per example; returns the number of lines written."""
    written = 0
    with open(path, "w", encoding="utf-8") as f:
        for example in examples:
            f.write(json.dumps(example.to_dict(), ensure_ascii=False) + "\n")
            written += 1
    logger.info(f"Wrote {written} examples to {path}")
    return written

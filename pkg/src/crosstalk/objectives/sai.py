"""
Semantic argument identification on single-sentence SRL data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

from crosstalk.corpus.codec import bio_encode
from crosstalk.corpus.loaders import SAI_ROLES
from crosstalk.models import AnnotatedDialogue, Dialogue, Frame, LabelInventory, TagSequence


@dataclass(frozen=True)
class SaiExample:
    """One SRL sentence with its predicate and BIO targets over the shared roles."""

    dialogue: Dialogue
    frame: Frame
    tags: TagSequence

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.dialogue.id,
            "tokens": list(self.dialogue.utterances[0].tokens),
            "predicate": self.frame.predicate.to_dict(),
            "tags": self.tags.labels(),
        }


def sai_build(
    sample: AnnotatedDialogue,
    inventory: Optional[LabelInventory] = None,
) -> SaiExample:
    """
    Build SAI targets for a sample produced by ``load_srl``.

    Only arguments whose role is both shared and in ``inventory`` become
    targets, so the tag ids line up with a CSRL inventory that has extra roles.

    Args:
        sample: Single-utterance dialogue with exactly one frame
        inventory: Tag inventory; defaults to the eight shared roles

    Returns:
        SaiExample with BIO targets
    """
    inventory = inventory or LabelInventory(SAI_ROLES)
    if len(sample.frames) != 1 or len(sample.dialogue.utterances) != 1:
        raise ValueError(f"SRL sample {sample.dialogue.id} must hold one sentence and one frame")
    frame = sample.frames[0]
    kept = tuple(a for a in frame.arguments if a.role in SAI_ROLES and a.role in inventory)
    if len(kept) != len(frame.arguments):
        frame = replace(frame, arguments=kept)
    return SaiExample(
        dialogue=sample.dialogue,
        frame=frame,
        tags=bio_encode(frame, sample.dialogue, inventory),
    )

"""
BIO label codec between frames and per-word tag sequences.

The serialized context of a frame is every utterance up to and including
the predicate's utterance, oldest first. Word positions in a TagSequence
index into that flattened word list.
"""

from __future__ import annotations

from typing import List, NamedTuple, Sequence, Tuple

from crosstalk.models import Dialogue, Frame, LabelInventory, TagSequence


class DecodedSpan(NamedTuple):
    """A labeled span over flat word positions (end-inclusive)."""

    start: int
    end: int
    role: str


def context_offsets(dialogue: Dialogue, frame: Frame) -> List[int]:
    """Flat position of the first word of each utterance in the frame's context."""
    offsets = []
    position = 0
    for utterance in dialogue.utterances[: frame.predicate.utterance + 1]:
        offsets.append(position)
        position += len(utterance)
    return offsets


def context_positions(dialogue: Dialogue, frame: Frame) -> List[Tuple[int, int]]:
    """(utterance index, word index) for every word of the frame's context."""
    return [
        (u, k)
        for u, utterance in enumerate(dialogue.utterances[: frame.predicate.utterance + 1])
        for k in range(len(utterance))
    ]


def bio_encode(frame: Frame, dialogue: Dialogue, inventory: LabelInventory) -> TagSequence:
    """
    Encode a frame's arguments as BIO tags over its serialized context.

    Predicate tokens stay ``O``: the predicate is an input indicator, not an
    output class.

    Args:
        frame: Frame whose arguments become tags
        dialogue: Dialogue the frame belongs to
        inventory: Label inventory defining tag ids

    Returns:
        One tag id per context word

    Raises:
        ValueError: On overlapping spans or a role outside the inventory
    """
    offsets = context_offsets(dialogue, frame)
    length = offsets[-1] + len(dialogue.utterances[frame.predicate.utterance])
    tags = [0] * length
    for argument in frame.arguments:
        if argument.role not in inventory:
            raise ValueError(f"Role {argument.role} is not in {inventory}")
        span = argument.span
        start = offsets[span.utterance] + span.start
        end = offsets[span.utterance] + span.end
        if any(tags[start : end + 1]):
            raise ValueError(f"Overlapping argument spans at {span}")
        tags[start] = inventory.begin(argument.role)
        for position in range(start + 1, end + 1):
            tags[position] = inventory.inside(argument.role)
    return TagSequence(tags=tuple(tags), inventory=inventory)


def bio_decode(
    tags: TagSequence | Sequence[int],
    inventory: LabelInventory | None = None,
) -> List[DecodedSpan]:
    """
    Recover maximal labeled spans from a tag sequence.

    Total over ill-formed input: an ``I-x`` that does not continue an open
    ``x`` span starts a new span, exactly as if it were ``B-x``.

    Args:
        tags: Tag sequence, or raw tag ids together with ``inventory``
        inventory: Required when ``tags`` is a plain sequence of ids

    Returns:
        Decoded spans in order of their start position
    """
    if isinstance(tags, TagSequence):
        inventory, ids = tags.inventory, tags.tags
    else:
        if inventory is None:
            raise ValueError("inventory is required to decode raw tag ids")
        ids = tuple(tags)

    spans: List[DecodedSpan] = []
    open_role = None
    open_start = 0
    for position, tag_id in enumerate(ids):
        prefix, role = inventory.parse(int(tag_id))
        if prefix == "I" and role == open_role:
            continue
        if open_role is not None:
            spans.append(DecodedSpan(open_start, position - 1, open_role))
            open_role = None
        if prefix in ("B", "I"):
            open_role, open_start = role, position
    if open_role is not None:
        spans.append(DecodedSpan(open_start, len(ids) - 1, open_role))
    return spans

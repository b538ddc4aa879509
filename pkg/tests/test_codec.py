"""Tests for the BIO codec."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosstalk.config import DEFAULT_ROLES
from crosstalk.corpus.codec import (
    DecodedSpan,
    bio_decode,
    bio_encode,
    context_offsets,
    context_positions,
)
from crosstalk.models import Argument, Frame, LabelInventory, Span
from tests.factories import make_dialogue, toy_csrl

INVENTORY = LabelInventory(DEFAULT_ROLES)


def _dialogue():
    return make_dialogue("d", [("A", "i like tea"), ("B", "why do you love it")])


def test_context_covers_utterances_up_to_predicate():
    dialogue = _dialogue()
    frame = Frame(Span(1, 3, 3))
    assert context_offsets(dialogue, frame) == [0, 3]
    assert context_positions(dialogue, frame)[3] == (1, 0)
    assert len(context_positions(dialogue, Frame(Span(0, 1, 1)))) == 3


def test_encode_cross_turn_argument():
    item = toy_csrl(1)[0]
    tags = bio_encode(item.frames[0], item.dialogue, INVENTORY)

    labels = tags.labels()
    assert len(labels) == 3 + 6
    assert labels[2] == "B-ARG1"
    assert labels[5] == "B-ARG0"
    assert labels[6] == "O"  # predicate


def test_encode_multi_word_span():
    dialogue = _dialogue()
    frame = Frame(Span(1, 3, 3), (Argument(Span(0, 1, 2), "ARG1"),))
    assert bio_encode(frame, dialogue, INVENTORY).labels()[:3] == ["O", "B-ARG1", "I-ARG1"]


def test_encode_rejects_overlap_and_unknown_role():
    dialogue = _dialogue()
    overlapping = Frame(
        Span(1, 3, 3),
        (Argument(Span(0, 0, 1), "ARG0"), Argument(Span(0, 1, 2), "ARG1")),
    )
    with pytest.raises(ValueError, match="Overlapping"):
        bio_encode(overlapping, dialogue, INVENTORY)
    with pytest.raises(ValueError):
        bio_encode(Frame(Span(1, 3, 3), (Argument(Span(0, 0, 0), "ARGX"),)), dialogue, INVENTORY)


def test_decode_treats_stray_inside_as_begin():
    ids = [INVENTORY.inside("ARG0"), INVENTORY.inside("ARG0"), 0, INVENTORY.inside("ARG1")]
    assert bio_decode(ids, INVENTORY) == [
        DecodedSpan(0, 1, "ARG0"),
        DecodedSpan(3, 3, "ARG1"),
    ]


def test_decode_splits_on_role_change():
    ids = [INVENTORY.begin("ARG0"), INVENTORY.inside("ARG1")]
    assert bio_decode(ids, INVENTORY) == [DecodedSpan(0, 0, "ARG0"), DecodedSpan(1, 1, "ARG1")]


def test_decode_requires_inventory_for_raw_ids():
    with pytest.raises(ValueError):
        bio_decode([0, 1])


@st.composite
def span_layouts(draw):
    """Non-overlapping labeled spans over a flat sequence."""
    length = draw(st.integers(min_value=1, max_value=30))
    spans = []
    position = 0
    while position < length:
        gap = draw(st.integers(min_value=0, max_value=3))
        start = position + gap
        if start >= length:
            break
        end = draw(st.integers(min_value=start, max_value=min(length - 1, start + 4)))
        spans.append(DecodedSpan(start, end, draw(st.sampled_from(DEFAULT_ROLES))))
        position = end + 1
    return length, spans


@settings(max_examples=1000, deadline=None)
@given(span_layouts())
def test_decode_inverts_encode(layout):
    length, spans = layout
    dialogue = make_dialogue("d", [("A", " ".join(["w"] * length)), ("B", "ok")])
    frame = Frame(
        Span(1, 0, 0),
        tuple(Argument(Span(0, s.start, s.end), s.role) for s in spans),
    )

    decoded = bio_decode(bio_encode(frame, dialogue, INVENTORY))

    assert decoded == spans


@given(st.lists(st.integers(min_value=0, max_value=len(INVENTORY) - 1), max_size=40))
def test_decode_is_total_and_spans_are_disjoint(ids):
    spans = bio_decode(ids, INVENTORY)
    covered = [p for s in spans for p in range(s.start, s.end + 1)]
    assert len(covered) == len(set(covered))
    assert all(0 <= p < len(ids) for p in covered)
    labeled = [p for p, t in enumerate(ids) if t != 0]
    assert sorted(covered) == labeled

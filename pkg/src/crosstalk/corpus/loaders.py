"""
Loaders for dialogue-CSRL, parallel-sentence and SRL corpora.

All loaders are deterministic: the same file always yields the same
records in the same order. Errors carry the path and 1-based line number.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from crosstalk.config import DEFAULT_ROLES
from crosstalk.corpus.schema import DialogueRecord, FrameRecord, SrlRecord
from crosstalk.errors import CorpusError
from crosstalk.models import (
    AnnotatedDialogue,
    Argument,
    Dialogue,
    Frame,
    LabelInventory,
    ParallelPair,
    Span,
    Utterance,
)

logger = logging.getLogger(__name__)

# Roles retained from standard SRL data.
SAI_ROLES: Tuple[str, ...] = tuple(DEFAULT_ROLES)

# CoNLL-2012 modifier names for the three shared adjunct roles.
_ROLE_ALIASES = {
    "ARGM-LOC": "ARG-LOC",
    "ARGM-TMP": "ARG-TMP",
    "ARGM-PRP": "ARG-PRP",
}


def iter_lines(path: str | Path) -> Iterator[Tuple[int, str]]:
    """Yield (line number, stripped line) for non-blank lines."""
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if line:
                    yield lineno, line
    except OSError as e:
        raise CorpusError(f"{path}: cannot read ({e})") from e
    except UnicodeDecodeError as e:
        raise CorpusError(f"{path}: not valid UTF-8 ({e})") from e


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "record"
    return f"{location}: {first['msg']}"


def load_dialogues(
    path: str | Path,
    inventory: Optional[LabelInventory] = None,
) -> List[AnnotatedDialogue]:
    """
    Load a dialogue-CSRL JSON-lines file.

    Args:
        path: File with one dialogue record per line
        inventory: When given, every argument role must belong to it

    Returns:
        Validated dialogues with their frames

    Raises:
        CorpusError: On a malformed record or a violated frame invariant
    """
    dataset: List[AnnotatedDialogue] = []
    for lineno, line in iter_lines(path):
        try:
            record = DialogueRecord.model_validate_json(line)
        except ValidationError as e:
            raise CorpusError(f"{path}:{lineno}: malformed record ({_describe(e)})") from e

        dialogue = Dialogue(
            id=record.id,
            language=record.language,
            utterances=tuple(
                Utterance(speaker=u.speaker, turn=u.turn, tokens=tuple(u.tokens))
                for u in record.utterances
            ),
        )
        frames = []
        for index, frame_record in enumerate(record.frames):
            where = f"{path}:{lineno}: dialogue {record.id} frame {index}"
            frames.append(_build_frame(frame_record, dialogue, inventory, where))
        dataset.append(AnnotatedDialogue(dialogue=dialogue, frames=tuple(frames)))

    logger.info(f"Loaded {len(dataset)} dialogues from {path}")
    return dataset


def _build_frame(
    record: FrameRecord,
    dialogue: Dialogue,
    inventory: Optional[LabelInventory],
    where: str,
) -> Frame:
    predicate = Span(record.predicate.utt, record.predicate.start, record.predicate.end)
    _check_span(predicate, dialogue, f"{where}: predicate")

    arguments = []
    for a in record.arguments:
        span = Span(a.utt, a.start, a.end)
        _check_span(span, dialogue, f"{where}: argument {a.role}")
        if span.utterance > predicate.utterance:
            raise CorpusError(
                f"{where}: argument {a.role} in utterance {span.utterance} comes after "
                f"the predicate's utterance {predicate.utterance}"
            )
        if inventory is not None and a.role not in inventory:
            raise CorpusError(f"{where}: role {a.role} is not in the label inventory")
        arguments.append(Argument(span=span, role=a.role))

    frame = Frame(predicate=predicate, arguments=tuple(arguments))
    _check_overlaps(frame, where)
    return frame


def _check_span(span: Span, dialogue: Dialogue, where: str) -> None:
    if span.utterance >= len(dialogue.utterances):
        raise CorpusError(f"{where}: utterance {span.utterance} does not exist")
    length = len(dialogue.utterances[span.utterance])
    if span.end >= length:
        raise CorpusError(
            f"{where}: span end {span.end} is outside utterance {span.utterance} "
            f"of length {length}"
        )


def _check_overlaps(frame: Frame, where: str) -> None:
    spans = [frame.predicate] + [a.span for a in frame.arguments]
    for i, left in enumerate(spans):
        for right in spans[i + 1 :]:
            if left.overlaps(right):
                raise CorpusError(f"{where}: overlapping spans {left} and {right}")


def load_parallel(path: str | Path) -> List[ParallelPair]:
    """
    Load a tab-separated parallel corpus.

    Each side is whitespace-tokenized.

    Args:
        path: UTF-8 file with one ``source<TAB>target`` pair per line

    Returns:
        Aligned sentence pairs

    Raises:
        CorpusError: On a line without exactly two columns or with an empty side
    """
    pairs: List[ParallelPair] = []
    for lineno, line in iter_lines(path):
        columns = line.split("\t")
        if len(columns) != 2:
            raise CorpusError(
                f"{path}:{lineno}: expected 2 tab-separated columns, got {len(columns)}"
            )
        source, target = (tuple(column.split()) for column in columns)
        if not source or not target:
            raise CorpusError(f"{path}:{lineno}: empty side in parallel pair")
        pairs.append(ParallelPair(source=source, target=target))

    logger.info(f"Loaded {len(pairs)} parallel pairs from {path}")
    return pairs


def normalize_role(role: str) -> str:
    """Map CoNLL-2012 adjunct names onto the shared role names."""
    return _ROLE_ALIASES.get(role, role)


def load_srl(
    path: str | Path,
    roles: Sequence[str] = SAI_ROLES,
) -> List[AnnotatedDialogue]:
    """
    Load a simplified single-sentence SRL file.

    Every sample becomes a one-utterance dialogue with exactly one frame.
    Roles outside ``roles`` are dropped.

    Args:
        path: JSON-lines file of SRL samples
        roles: Roles to keep

    Returns:
        One AnnotatedDialogue per sample

    Raises:
        CorpusError: On a malformed sample or a sample without a predicate
    """
    keep = set(roles)
    dataset: List[AnnotatedDialogue] = []
    dropped = 0
    for lineno, line in iter_lines(path):
        try:
            record = SrlRecord.model_validate_json(line)
        except ValidationError as e:
            raise CorpusError(f"{path}:{lineno}: malformed record ({_describe(e)})") from e
        if record.predicate is None:
            raise CorpusError(f"{path}:{lineno}: sample has no predicate")

        dialogue = Dialogue(
            id=f"srl-{lineno}",
            language=record.language,
            utterances=(Utterance(speaker="", turn=1, tokens=tuple(record.tokens)),),
        )
        where = f"{path}:{lineno}: srl sample"
        predicate = Span(0, record.predicate.start, record.predicate.end)
        _check_span(predicate, dialogue, f"{where}: predicate")

        arguments = []
        for a in record.arguments:
            role = normalize_role(a.role)
            if role not in keep:
                dropped += 1
                continue
            span = Span(0, a.start, a.end)
            _check_span(span, dialogue, f"{where}: argument {role}")
            arguments.append(Argument(span=span, role=role))

        frame = Frame(predicate=predicate, arguments=tuple(arguments))
        _check_overlaps(frame, where)
        dataset.append(AnnotatedDialogue(dialogue=dialogue, frames=(frame,)))

    if dropped:
        logger.debug(f"Dropped {dropped} arguments with roles outside {sorted(keep)}")
    logger.info(f"Loaded {len(dataset)} SRL samples from {path}")
    return dataset

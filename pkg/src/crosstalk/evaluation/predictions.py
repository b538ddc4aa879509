"""
Prediction files: one JSON line per frame in the corpus frame schema.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Set, TextIO, Tuple

from pydantic import ValidationError

from crosstalk.corpus.loaders import iter_lines
from crosstalk.corpus.schema import PredictionRecord
from crosstalk.errors import CorpusError
from crosstalk.evaluation.scoring import ScoreReport, frame_key, frame_tuples, score
from crosstalk.models import AnnotatedDialogue, Argument, Frame, SemanticTuple, Span

PredictionKey = Tuple[str, int]


def prediction_line(dialogue_id: str, index: int, frame: Frame) -> str:
    record = {"id": dialogue_id, "frame": index, **frame.to_dict()}
    return json.dumps(record, ensure_ascii=False)


def write_predictions(
    predictions: Iterable[Tuple[PredictionKey, Frame]],
    stream: TextIO,
) -> int:
    written = 0
    for (dialogue_id, index), frame in predictions:
        stream.write(prediction_line(dialogue_id, index, frame) + "\n")
        written += 1
    return written


def load_predictions(path: str | Path) -> Dict[PredictionKey, Frame]:
    """
    Read a prediction file.

    Raises:
        CorpusError: On a malformed line or a duplicated (id, frame) key
    """
    predictions: Dict[PredictionKey, Frame] = {}
    for lineno, line in iter_lines(path):
        try:
            record = PredictionRecord.model_validate_json(line)
        except ValidationError as e:
            raise CorpusError(
                f"{path}:{lineno}: malformed prediction ({e.errors()[0]['msg']})"
            ) from e
        key = (record.id, record.frame)
        if key in predictions:
            raise CorpusError(
                f"{path}:{lineno}: duplicate prediction for {record.id} #{record.frame}"
            )
        predictions[key] = Frame(
            predicate=Span(record.predicate.utt, record.predicate.start, record.predicate.end),
            arguments=tuple(
                Argument(Span(a.utt, a.start, a.end), a.role) for a in record.arguments
            ),
        )
    return predictions


def gold_tuples(dataset: Sequence[AnnotatedDialogue]) -> List[SemanticTuple]:
    return [
        t
        for item in dataset
        for i, frame in enumerate(item.frames)
        for t in frame_tuples(frame_key(item.dialogue.id, i), frame)
    ]


def score_predictions(
    dataset: Sequence[AnnotatedDialogue],
    predictions: Dict[PredictionKey, Frame],
) -> ScoreReport:
    """Score predicted frames against the gold frames of ``dataset``."""
    predicted: Set[SemanticTuple] = set()
    for (dialogue_id, index), frame in predictions.items():
        predicted |= frame_tuples(frame_key(dialogue_id, index), frame)
    return score(gold_tuples(dataset), predicted)

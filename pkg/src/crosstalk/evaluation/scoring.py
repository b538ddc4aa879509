"""
Tuple extraction and micro-averaged F1 over all, cross-turn and intra-turn arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Iterable, Sequence, Set, Tuple

from crosstalk.corpus.codec import bio_decode
from crosstalk.models import Frame, LabelInventory, SemanticTuple, Span, TagSequence

BUCKETS = ("all", "cross", "intra")


def frame_key(dialogue_id: str, index: int) -> str:
    """Identifier of the ``index``-th frame of a dialogue."""
    return f"{dialogue_id}#{index}"


def extract_tuples(
    tags: TagSequence | Sequence[int],
    key: str,
    predicate: Span,
    positions: Sequence[Tuple[int, int]],
    inventory: LabelInventory | None = None,
) -> Set[SemanticTuple]:
    """
    Decode tags and attach the frame's predicate.

    Args:
        tags: Per-word tags over the context window
        key: Frame identifier
        predicate: The frame's predicate span
        positions: (utterance index, word index) for every tagged word
        inventory: Required when ``tags`` holds raw ids

    Returns:
        One SemanticTuple per decoded span. A span running across an
        utterance boundary is cut at the end of the utterance it starts in.
    """
    tuples: Set[SemanticTuple] = set()
    for span in bio_decode(tags, inventory):
        utterance, start = positions[span.start]
        end = start
        for position in range(span.start + 1, span.end + 1):
            u, k = positions[position]
            if u != utterance:
                break
            end = k
        tuples.add(SemanticTuple(key, predicate, Span(utterance, start, end), span.role))
    return tuples


def frame_tuples(key: str, frame: Frame) -> Set[SemanticTuple]:
    """Gold tuples of an annotated frame."""
    return {SemanticTuple(key, frame.predicate, a.span, a.role) for a in frame.arguments}


@dataclass(frozen=True)
class BucketScore:
    """Counts and micro P/R/F1 for one bucket."""

    gold: int = 0
    predicted: int = 0
    matched: int = 0

    @property
    def precision(self) -> float:
        return self.matched / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.matched / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def empty(self) -> bool:
        return self.gold == 0 and self.predicted == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "gold": self.gold,
            "predicted": self.predicted,
            "matched": self.matched,
            "empty": self.empty,
        }


@dataclass(frozen=True)
class ScoreReport:
    all: BucketScore
    cross: BucketScore
    intra: BucketScore

    @property
    def f1_all(self) -> float:
        return self.all.f1

    @property
    def f1_cross(self) -> float:
        return self.cross.f1

    @property
    def f1_intra(self) -> float:
        return self.intra.f1

    def buckets(self) -> Dict[str, BucketScore]:
        return {"all": self.all, "cross": self.cross, "intra": self.intra}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f1_all": self.f1_all,
            "f1_cross": self.f1_cross,
            "f1_intra": self.f1_intra,
            "counts": {name: b.to_dict() for name, b in self.buckets().items()},
        }

    def format_text(self) -> str:
        lines = [f"{'bucket':<8} {'P':>8} {'R':>8} {'F1':>8} {'gold':>7} {'pred':>7} {'match':>7}"]
        for name, b in self.buckets().items():
            flag = "  (empty)" if b.empty else ""
            lines.append(
                f"{name:<8} {b.precision:>8.4f} {b.recall:>8.4f} {b.f1:>8.4f} "
                f"{b.gold:>7} {b.predicted:>7} {b.matched:>7}{flag}"
            )
        return "\n".join(lines)


def _bucket(gold: Set[SemanticTuple], predicted: Set[SemanticTuple]) -> BucketScore:
    return BucketScore(gold=len(gold), predicted=len(predicted), matched=len(gold & predicted))


def score(gold: Iterable[SemanticTuple], predicted: Iterable[SemanticTuple]) -> ScoreReport:
    """
    Micro-averaged exact-match scores.

    A predicted tuple matches a gold tuple when frame, predicate, span and
    role are all equal. The cross and intra buckets restrict both sides to
    tuples of that kind.
    """
    gold_set, predicted_set = set(gold), set(predicted)

    def part(cross: bool) -> Tuple[Set[SemanticTuple], Set[SemanticTuple]]:
        return (
            {t for t in gold_set if t.cross == cross},
            {t for t in predicted_set if t.cross == cross},
        )

    return ScoreReport(
        all=_bucket(gold_set, predicted_set),
        cross=_bucket(*part(True)),
        intra=_bucket(*part(False)),
    )

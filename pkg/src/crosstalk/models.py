"""
Core data models for crosstalk.

Corpus records are frozen dataclasses: once a loader has validated them
they are never mutated, so they can be shared freely between the trainer,
example builders and evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple


class StageName(str, Enum):
    """Training stages, in the order they must run."""

    CLM = "clm"
    SC = "sc"
    PA = "pa"
    CSRL = "csrl"


class StageStatus(str, Enum):
    """Status of a pipeline stage."""

    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Utterance:
    """One turn of a dialogue: the speaker and its pre-tokenized words."""

    speaker: str
    turn: int
    tokens: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Dialogue:
    """
    A conversation C = {u_1, ..., u_N}.

    Turn indices are strictly increasing from 1 and every utterance holds at
    least one token.
    """

    id: str
    utterances: Tuple[Utterance, ...]
    language: str = "und"

    def __post_init__(self) -> None:
        if not self.utterances:
            raise ValueError(f"Dialogue {self.id} has no utterances")
        if self.utterances[0].turn != 1:
            raise ValueError(
                f"Dialogue {self.id}: first turn must be 1, got {self.utterances[0].turn}"
            )
        previous = 0
        for i, utterance in enumerate(self.utterances):
            if not utterance.tokens:
                raise ValueError(f"Dialogue {self.id}: utterance {i} has no tokens")
            if utterance.turn <= previous:
                raise ValueError(
                    f"Dialogue {self.id}: turn indices must increase from 1 "
                    f"(utterance {i} has turn {utterance.turn})"
                )
            previous = utterance.turn

    @property
    def speakers(self) -> List[str]:
        """Distinct speakers in order of first appearance."""
        seen: List[str] = []
        for utterance in self.utterances:
            if utterance.speaker not in seen:
                seen.append(utterance.speaker)
        return seen

    def speaker_ids(self) -> List[int]:
        """Per-utterance speaker ids, numbered from 1 by first appearance."""
        order = {speaker: i + 1 for i, speaker in enumerate(self.speakers)}
        return [order[u.speaker] for u in self.utterances]

    def token_count(self) -> int:
        return sum(len(u) for u in self.utterances)


@dataclass(frozen=True, order=True)
class Span:
    """Token range inside one utterance; 0-based, end-inclusive."""

    utterance: int
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"Span start {self.start} is after end {self.end}")

    def overlaps(self, other: "Span") -> bool:
        return (
            self.utterance == other.utterance
            and self.start <= other.end
            and other.start <= self.end
        )

    def to_dict(self) -> Dict[str, int]:
        return {"utt": self.utterance, "start": self.start, "end": self.end}


@dataclass(frozen=True)
class Argument:
    """A gold or predicted argument span with its role."""

    span: Span
    role: str

    def to_dict(self) -> Dict[str, Any]:
        return {**self.span.to_dict(), "role": self.role}


@dataclass(frozen=True)
class Frame:
    """One predicate occurrence plus its arguments: the unit of CSRL supervision."""

    predicate: Span
    arguments: Tuple[Argument, ...] = ()

    @property
    def roles(self) -> List[str]:
        return [a.role for a in self.arguments]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "predicate": self.predicate.to_dict(),
            "arguments": [a.to_dict() for a in self.arguments],
        }


@dataclass(frozen=True)
class AnnotatedDialogue:
    """A dialogue together with its annotated frames."""

    dialogue: Dialogue
    frames: Tuple[Frame, ...] = ()


@dataclass(frozen=True)
class ParallelPair:
    """Sentence-aligned pair from a parallel corpus."""

    source: Tuple[str, ...]
    target: Tuple[str, ...]

    def swapped(self) -> "ParallelPair":
        return ParallelPair(source=self.target, target=self.source)


class LabelInventory:
    """
    Role inventory and the derived BIO tag set L = {O} ∪ {B-x, I-x}.

    Tag ids are stable: ``O`` is 0, then ``B-x``/``I-x`` pairs in role order.
    """

    OUTSIDE = "O"

    def __init__(self, roles: Sequence[str]) -> None:
        if len(set(roles)) != len(roles):
            raise ValueError(f"Duplicate roles in inventory: {list(roles)}")
        self.roles: Tuple[str, ...] = tuple(roles)
        tags = [self.OUTSIDE]
        for role in self.roles:
            tags.extend([f"B-{role}", f"I-{role}"])
        self.tags: Tuple[str, ...] = tuple(tags)
        self._tag_ids = {tag: i for i, tag in enumerate(self.tags)}

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, role: object) -> bool:
        return role in self.roles

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelInventory) and self.roles == other.roles

    def __hash__(self) -> int:
        return hash(self.roles)

    def __repr__(self) -> str:
        return f"LabelInventory({list(self.roles)})"

    def begin(self, role: str) -> int:
        return self._tag_ids[f"B-{role}"]

    def inside(self, role: str) -> int:
        return self._tag_ids[f"I-{role}"]

    def tag_id(self, tag: str) -> int:
        return self._tag_ids[tag]

    def parse(self, tag_id: int) -> Tuple[str, Optional[str]]:
        """Split a tag id into its prefix (``O``, ``B``, ``I``) and role."""
        tag = self.tags[tag_id]
        if tag == self.OUTSIDE:
            return self.OUTSIDE, None
        prefix, role = tag.split("-", 1)
        return prefix, role


@dataclass(frozen=True)
class TagSequence:
    """Per-word BIO tag ids for one frame over its serialized context."""

    tags: Tuple[int, ...]
    inventory: LabelInventory

    def __len__(self) -> int:
        return len(self.tags)

    def labels(self) -> List[str]:
        return [self.inventory.tags[t] for t in self.tags]


@dataclass(frozen=True, order=True)
class SemanticTuple:
    """
    A (predicate, argument, role) triple, the unit of evaluation.

    ``frame`` identifies the frame the tuple belongs to so that tuples from
    different dialogues never match each other.
    """

    frame: str
    predicate: Span
    argument: Span
    role: str

    @property
    def cross(self) -> bool:
        """True when the argument sits in a different turn than the predicate."""
        return self.argument.utterance != self.predicate.utterance


@dataclass(frozen=True)
class DatasetStats:
    """Corpus statistics as reported for CSRL datasets."""

    dialogues: int = 0
    utterances: int = 0
    predicates: int = 0
    arguments: int = 0
    cross_arguments: int = 0
    mean_tokens_per_utterance: float = 0.0

    @property
    def cross_ratio(self) -> float:
        if self.arguments == 0:
            return 0.0
        return self.cross_arguments / self.arguments

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dialogues": self.dialogues,
            "utterances": self.utterances,
            "predicates": self.predicates,
            "arguments": self.arguments,
            "mean_tokens_per_utterance": round(self.mean_tokens_per_utterance, 2),
            "cross_ratio": round(self.cross_ratio, 4),
        }


@dataclass
class StageResult:
    """Result of a pipeline stage execution."""

    stage_name: str
    status: StageStatus
    started_at: datetime
    completed_at: Optional[datetime] = None

    # Output
    summary: str = ""
    output: Dict[str, Any] = field(default_factory=dict)
    checkpoint: Optional[Any] = None
    losses: Dict[str, float] = field(default_factory=dict)
    scores: Optional[Dict[str, Any]] = None

    # Error handling
    error: Optional[str] = None
    exception: Optional[BaseException] = field(default=None, repr=False)

    @property
    def duration_seconds(self) -> Optional[float]:
        """Get stage duration in seconds."""
        if self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "stage_name": self.stage_name,
            "status": self.status.value,
            "started_at": self.started_at.isoformat(),
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
            "duration_seconds": self.duration_seconds,
            "summary": self.summary,
            "losses": self.losses,
            "scores": self.scores,
            "error": self.error,
        }

"""
On-disk record schemas.

Each JSON line is validated with pydantic before it is turned into the
frozen corpus dataclasses; structural problems surface here, cross-field
frame checks happen in the loaders.
"""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Record(BaseModel):
    model_config = ConfigDict(extra="ignore", frozen=True)


class SpanRecord(_Record):
    utt: int = Field(ge=0)
    start: int = Field(ge=0)
    end: int = Field(ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> "SpanRecord":
        if self.start > self.end:
            raise ValueError(f"span start {self.start} is after end {self.end}")
        return self


class ArgumentRecord(SpanRecord):
    role: str = Field(min_length=1)


class FrameRecord(_Record):
    predicate: SpanRecord
    arguments: List[ArgumentRecord] = Field(default_factory=list)


class UtteranceRecord(_Record):
    speaker: str
    turn: int = Field(ge=1)
    tokens: List[str] = Field(min_length=1)


class DialogueRecord(_Record):
    id: str
    language: str = "und"
    utterances: List[UtteranceRecord] = Field(min_length=1)
    frames: List[FrameRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _turns_increase(self) -> "DialogueRecord":
        if self.utterances[0].turn != 1:
            raise ValueError(f"first turn must be 1, got {self.utterances[0].turn}")
        previous = 0
        for i, utterance in enumerate(self.utterances):
            if utterance.turn <= previous:
                raise ValueError(
                    f"turn indices must strictly increase from 1 "
                    f"(utterance {i} has turn {utterance.turn})"
                )
            previous = utterance.turn
        return self


class SrlSpanRecord(_Record):
    start: int = Field(ge=0)
    end: int = Field(ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> "SrlSpanRecord":
        if self.start > self.end:
            raise ValueError(f"span start {self.start} is after end {self.end}")
        return self


class SrlArgumentRecord(SrlSpanRecord):
    role: str = Field(min_length=1)


class SrlRecord(_Record):
    tokens: List[str] = Field(min_length=1)
    predicate: Optional[SrlSpanRecord] = None
    arguments: List[SrlArgumentRecord] = Field(default_factory=list)
    language: str = "und"


class PredictionRecord(_Record):
    id: str
    frame: int = Field(ge=0)
    predicate: SpanRecord
    arguments: List[ArgumentRecord] = Field(default_factory=list)

"""
Toy corpora and tiny configurations shared by the tests.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

from crosstalk.config import CrosstalkConfig, ModelConfig, TrainConfig
from crosstalk.models import (
    AnnotatedDialogue,
    Argument,
    Dialogue,
    Frame,
    ParallelPair,
    Span,
    Utterance,
)

TINY_MODEL: Dict[str, Any] = dict(
    backbone_layers=4,
    backbone_hidden=8,
    backbone_heads=2,
    max_len=64,
    hidden_size=8,
    heads=2,
    ffn_size=16,
    word_layers=1,
    pa_layers=1,
    utterance_layers=1,
    turn_dim=4,
    speaker_dim=4,
    predicate_dim=4,
    max_speakers=4,
    max_turns=16,
    max_utterances=16,
    dropout=0.0,
)

TINY_TRAIN: Dict[str, Any] = dict(
    batch_size=4,
    max_lr=1e-3,
    min_lr=1e-4,
    lm_max_lr=1e-3,
    lm_min_lr=1e-4,
    max_steps=10,
    max_epochs=2,
    log_every=5,
)

NAMES = [
    "tea", "coffee", "jazz", "chess", "rain", "tennis", "pizza", "music", "books", "films",
    "snow", "cats", "dogs", "trains", "maps", "poems", "soup", "golf", "art", "bread",
]


def tiny_config(model: Dict[str, Any] | None = None, **train: Any) -> CrosstalkConfig:
    return CrosstalkConfig(
        model=ModelConfig(**{**TINY_MODEL, **(model or {})}),
        train=TrainConfig(**{**TINY_TRAIN, **train}),
    )


def tiny_overrides(**extra: Any) -> List[str]:
    """``--set`` arguments reproducing the tiny configuration on the command line."""
    values = {**TINY_MODEL, **TINY_TRAIN, **extra}
    args: List[str] = []
    for key, value in values.items():
        args.extend(["--set", f"{key}={value}"])
    return args


def make_dialogue(
    dialogue_id: str,
    turns: Sequence[Tuple[str, str]],
    language: str = "en",
) -> Dialogue:
    return Dialogue(
        id=dialogue_id,
        language=language,
        utterances=tuple(
            Utterance(speaker=speaker, turn=i + 1, tokens=tuple(text.split()))
            for i, (speaker, text) in enumerate(turns)
        ),
    )


def arg(utt: int, start: int, end: int, role: str) -> Argument:
    return Argument(Span(utt, start, end), role)


def toy_csrl(count: int = 20, language: str = "en") -> List[AnnotatedDialogue]:
    """
    ``count`` two-speaker dialogues; the first half carry a second frame.

    Every dialogue has one cross-turn argument (the liked thing, referred to
    from the second turn).
    """
    items = []
    for i in range(count):
        name = NAMES[i % len(NAMES)]
        dialogue = make_dialogue(
            f"{language}-{i}",
            [("A", f"i like {name}"), ("B", "why do you love it ?")],
            language,
        )
        frames = [
            Frame(Span(1, 3, 3), (arg(1, 2, 2, "ARG0"), arg(0, 2, 2, "ARG1"))),
        ]
        if i < count // 2:
            frames.append(Frame(Span(0, 1, 1), (arg(0, 0, 0, "ARG0"), arg(0, 2, 2, "ARG1"))))
        items.append(AnnotatedDialogue(dialogue=dialogue, frames=tuple(frames)))
    return items


def toy_dialogues() -> List[AnnotatedDialogue]:
    """Unannotated dialogues in two languages, three to four turns each."""
    items = []
    for i in range(8):
        name = NAMES[i]
        en = make_dialogue(
            f"en-d{i}",
            [("A", f"do you like {name} ?"), ("B", "yes . a lot ."), ("A", "me too"),
             ("C", "not me")][: 3 + i % 2],
            "en",
        )
        zh = make_dialogue(
            f"zh-d{i}",
            [("A", f"你 喜欢 {name} 吗 ？"), ("B", "喜欢 。 很 喜欢 。"), ("A", "我 也 是")],
            "zh",
        )
        items.extend([AnnotatedDialogue(en), AnnotatedDialogue(zh)])
    return items


def toy_srl() -> List[AnnotatedDialogue]:
    """Single-sentence SRL samples with one frame each."""
    items = []
    for i, name in enumerate(NAMES[:10]):
        dialogue = make_dialogue(f"srl-{i}", [("", f"the man bought {name} yesterday")])
        frame = Frame(
            Span(0, 2, 2),
            (arg(0, 0, 1, "ARG0"), arg(0, 3, 3, "ARG1"), arg(0, 4, 4, "ARG-TMP")),
        )
        items.append(AnnotatedDialogue(dialogue, (frame,)))
    return items


def toy_pairs(count: int = 50) -> List[ParallelPair]:
    """Distinct pairs that all share the article, so n-gram negatives always exist."""
    colors = [("red", "rouge"), ("blue", "bleu"), ("green", "vert"), ("black", "noir"),
              ("white", "blanc")]
    nouns = [("car", "voiture"), ("house", "maison"), ("cat", "chat"), ("book", "livre"),
             ("door", "porte"), ("tree", "arbre"), ("ship", "bateau"), ("road", "route"),
             ("bird", "oiseau"), ("lamp", "lampe")]
    pairs = []
    for i in range(count):
        (c_en, c_fr), (n_en, n_fr) = colors[i % len(colors)], nouns[(i // len(colors)) % len(nouns)]
        pairs.append(
            ParallelPair(
                source=("the", c_en, n_en, "is", "here"),
                target=("la", n_fr, c_fr, "est", "ici"),
            )
        )
    return pairs


def dialogue_record(item: AnnotatedDialogue) -> Dict[str, Any]:
    return {
        "id": item.dialogue.id,
        "language": item.dialogue.language,
        "utterances": [
            {"speaker": u.speaker, "turn": u.turn, "tokens": list(u.tokens)}
            for u in item.dialogue.utterances
        ],
        "frames": [f.to_dict() for f in item.frames],
    }


def write_jsonl(path: Path, records: Iterable[Dict[str, Any]]) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def write_dialogues(path: Path, items: Iterable[AnnotatedDialogue]) -> Path:
    return write_jsonl(path, (dialogue_record(item) for item in items))


def write_pairs(path: Path, pairs: Iterable[ParallelPair]) -> Path:
    path.write_text(
        "".join(f"{' '.join(p.source)}\t{' '.join(p.target)}\n" for p in pairs),
        encoding="utf-8",
    )
    return path


def write_srl(path: Path, items: Iterable[AnnotatedDialogue]) -> Path:
    records = []
    for item in items:
        frame = item.frames[0]
        records.append(
            {
                "tokens": list(item.dialogue.utterances[0].tokens),
                "predicate": {"start": frame.predicate.start, "end": frame.predicate.end},
                "arguments": [
                    {"start": a.span.start, "end": a.span.end, "role": a.role}
                    for a in frame.arguments
                ],
            }
        )
    return write_jsonl(path, records)

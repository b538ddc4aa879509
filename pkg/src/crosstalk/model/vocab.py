"""
Word-level vocabulary with a character fallback, and context serialization.

Known words map to one subtoken. Unknown words fall back to ``##c``
character pieces learned at build time, then to ``[UNK]``; either way every
word keeps a stable word-boundary map.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from crosstalk.errors import CorpusError
from crosstalk.models import Dialogue, Frame

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SPECIAL_TOKENS = (PAD, UNK, CLS, SEP, MASK)
PIECE_PREFIX = "##"


class Vocabulary:
    """Token ↔ id mapping shared by the backbone and the TLM head."""

    def __init__(self, tokens: Sequence[str]) -> None:
        if tuple(tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ValueError(f"Vocabulary must start with {SPECIAL_TOKENS}")
        self.tokens: List[str] = list(tokens)
        self._ids: Dict[str, int] = {t: i for i, t in enumerate(self.tokens)}

    @classmethod
    def build(
        cls,
        sentences: Iterable[Sequence[str]],
        min_count: int = 1,
        max_size: Optional[int] = None,
    ) -> "Vocabulary":
        """
        Build a vocabulary from tokenized sentences.

        Args:
            sentences: Word sequences to count
            min_count: Minimum frequency for a word to get its own id
            max_size: Cap on the number of whole-word entries

        Returns:
            A vocabulary with specials, whole words, then character pieces
        """
        counts: Counter[str] = Counter()
        chars: set[str] = set()
        for sentence in sentences:
            counts.update(sentence)
            for word in sentence:
                chars.update(word)

        words = sorted(
            (w for w, c in counts.items() if c >= min_count and w not in SPECIAL_TOKENS),
            key=lambda w: (-counts[w], w),
        )
        if max_size is not None:
            words = words[:max_size]
        pieces = [PIECE_PREFIX + c for c in sorted(chars)]
        return cls(list(SPECIAL_TOKENS) + words + pieces)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    def id(self, token: str) -> int:
        return self._ids.get(token, self._ids[UNK])

    @property
    def pad_id(self) -> int:
        return self._ids[PAD]

    @property
    def cls_id(self) -> int:
        return self._ids[CLS]

    @property
    def sep_id(self) -> int:
        return self._ids[SEP]

    @property
    def mask_id(self) -> int:
        return self._ids[MASK]

    def tokenize_word(self, word: str) -> List[int]:
        """Subtoken ids for one word; never empty."""
        if word in self._ids and word not in SPECIAL_TOKENS:
            return [self._ids[word]]
        pieces = [self._ids.get(PIECE_PREFIX + c) for c in word]
        if pieces and all(p is not None for p in pieces):
            return [p for p in pieces if p is not None]
        return [self._ids[UNK]]

    def random_id(self, rng: np.random.Generator) -> int:
        """Uniform id over non-special tokens."""
        return int(rng.integers(len(SPECIAL_TOKENS), len(self.tokens)))

    def encode_pair(
        self, first: Sequence[str], second: Sequence[str]
    ) -> Tuple[List[int], List[int]]:
        """
        Serialize ``[CLS] first [SEP] second [SEP]``.

        Returns:
            Subtoken ids and, per subtoken, its word index (-1 for specials)
        """
        ids = [self.cls_id]
        word_ids = [-1]
        for w, word in enumerate(list(first)):
            pieces = self.tokenize_word(word)
            ids.extend(pieces)
            word_ids.extend([w] * len(pieces))
        ids.append(self.sep_id)
        word_ids.append(-1)
        offset = len(first)
        for w, word in enumerate(second):
            pieces = self.tokenize_word(word)
            ids.extend(pieces)
            word_ids.extend([offset + w] * len(pieces))
        ids.append(self.sep_id)
        word_ids.append(-1)
        return ids, word_ids


@dataclass(frozen=True)
class TokenizedContext:
    """
    A dialogue context serialized for the backbone.

    ``word_ids`` maps every subtoken to its word (-1 for ``[CLS]``/``[SEP]``);
    per-word lists (``word_*``) run over the kept words, oldest first.
    """

    input_ids: Tuple[int, ...]
    word_ids: Tuple[int, ...]
    word_utterances: Tuple[int, ...]  # position of the word's utterance in the window
    word_turns: Tuple[int, ...]
    word_speakers: Tuple[int, ...]
    word_predicate: Tuple[int, ...]
    utterance_indices: Tuple[int, ...]  # original utterance index of each kept utterance
    utterance_speakers: Tuple[int, ...]
    dropped_words: int = 0  # words of truncated utterances before the window

    @property
    def word_count(self) -> int:
        return len(self.word_utterances)

    @property
    def utterance_count(self) -> int:
        return len(self.utterance_indices)

    def word_starts(self) -> List[int]:
        """Index of the first subtoken of every word."""
        starts: List[int] = []
        for position, word in enumerate(self.word_ids):
            if word >= 0 and word == len(starts):
                starts.append(position)
        return starts

    def word_positions(self, dialogue: Dialogue) -> List[Tuple[int, int]]:
        """(original utterance index, word index in utterance) for every kept word."""
        return [
            (u, k)
            for u in self.utterance_indices
            for k in range(len(dialogue.utterances[u]))
        ]


def tokenize_context(
    dialogue: Dialogue,
    frame: Optional[Frame],
    max_len: int,
    vocab: Vocabulary,
    speaker_ids: Optional[Sequence[int]] = None,
    max_turns: Optional[int] = None,
) -> TokenizedContext:
    """
    Serialize a frame's context as ``[CLS] u_1 [SEP] u_2 [SEP] ...``.

    The context is every utterance up to the predicate's (the whole dialogue
    when ``frame`` is None). Whole utterances are dropped oldest-first until
    the sequence fits; the last utterance is never dropped.

    Args:
        dialogue: Source dialogue
        frame: Frame providing the predicate indicator, or None
        max_len: Maximum subtoken length including specials
        vocab: Vocabulary for subword lookup
        speaker_ids: Per-utterance speaker id override (e.g. masked speakers)
        max_turns: Clip turn ids to ``max_turns - 1`` when given

    Returns:
        TokenizedContext for the kept window

    Raises:
        CorpusError: When the last utterance alone exceeds ``max_len``
    """
    last = frame.predicate.utterance if frame is not None else len(dialogue.utterances) - 1
    speakers = list(speaker_ids) if speaker_ids is not None else dialogue.speaker_ids()
    pieces = [
        [vocab.tokenize_word(word) for word in utterance.tokens]
        for utterance in dialogue.utterances[: last + 1]
    ]
    lengths = [sum(len(p) for p in words) + 1 for words in pieces]  # +1 for [SEP]

    first = 0
    total = 1 + sum(lengths)
    while total > max_len and first < last:
        total -= lengths[first]
        first += 1
    if total > max_len:
        raise CorpusError(
            f"Dialogue {dialogue.id}: utterance {last} alone needs {total} subtokens "
            f"(max_len {max_len})"
        )

    input_ids = [vocab.cls_id]
    word_ids = [-1]
    word_utterances: List[int] = []
    word_turns: List[int] = []
    word_speakers: List[int] = []
    word_predicate: List[int] = []
    for position, u in enumerate(range(first, last + 1)):
        utterance = dialogue.utterances[u]
        turn = utterance.turn if max_turns is None else min(utterance.turn, max_turns - 1)
        for k, word_pieces in enumerate(pieces[u]):
            input_ids.extend(word_pieces)
            word_ids.extend([len(word_utterances)] * len(word_pieces))
            word_utterances.append(position)
            word_turns.append(turn)
            word_speakers.append(speakers[u])
            is_predicate = (
                frame is not None
                and u == frame.predicate.utterance
                and frame.predicate.start <= k <= frame.predicate.end
            )
            word_predicate.append(int(is_predicate))
        input_ids.append(vocab.sep_id)
        word_ids.append(-1)

    return TokenizedContext(
        input_ids=tuple(input_ids),
        word_ids=tuple(word_ids),
        word_utterances=tuple(word_utterances),
        word_turns=tuple(word_turns),
        word_speakers=tuple(word_speakers),
        word_predicate=tuple(word_predicate),
        utterance_indices=tuple(range(first, last + 1)),
        utterance_speakers=tuple(speakers[first : last + 1]),
        dropped_words=sum(len(u) for u in dialogue.utterances[:first]),
    )

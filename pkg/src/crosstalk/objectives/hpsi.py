"""
Hard parallel sentence identification.

Half of the examples are true translation pairs. The rest replace one side
with a hard negative: a lexically close sentence from the same language
found by n-gram overlap (40%), or a perturbed copy of the replaced sentence
(60%).
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from crosstalk.models import ParallelPair

logger = logging.getLogger(__name__)

PARALLEL_PROBABILITY = 0.5
NGRAM_PROBABILITY = 0.4
MAX_NGRAM = 4

Sentence = Tuple[str, ...]


class NegativeSource(str, Enum):
    NONE = "none"
    NGRAM = "ngram"
    PERTURB = "perturb"


@dataclass(frozen=True)
class HpsiExample:
    """A sentence pair labeled parallel (1) or non-parallel (0)."""

    first: Sentence
    second: Sentence
    label: int
    source: NegativeSource

    def __post_init__(self) -> None:
        if (self.label == 1) != (self.source == NegativeSource.NONE):
            raise ValueError(f"Label {self.label} does not fit negative source {self.source}")

    @property
    def parallel(self) -> bool:
        return self.label == 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "first": list(self.first),
            "second": list(self.second),
            "label": self.label,
            "source": self.source.value,
        }


class NgramCandidate(NamedTuple):
    n: int
    index: int
    score: float
    sentence: Sentence


def ngrams(sentence: Sequence[str], n: int) -> Set[Sentence]:
    """Distinct n-grams of a sentence."""
    tokens = tuple(sentence)
    return {tokens[i : i + n] for i in range(len(tokens) - n + 1)}


class NgramIndex:
    """Inverted n-gram index over one side of a parallel corpus."""

    def __init__(self, sentences: Sequence[Sequence[str]], max_n: int = MAX_NGRAM) -> None:
        self.sentences: List[Sentence] = [tuple(s) for s in sentences]
        self.max_n = max_n
        self._postings: Dict[int, Dict[Sentence, List[int]]] = {
            n: defaultdict(list) for n in range(1, max_n + 1)
        }
        for index, sentence in enumerate(self.sentences):
            for n in range(1, max_n + 1):
                for gram in ngrams(sentence, n):
                    self._postings[n][gram].append(index)

    def __len__(self) -> int:
        return len(self.sentences)

    def candidates(self, sentence: Sequence[str]) -> List[NgramCandidate]:
        """
        Best-overlapping corpus sentence for each n in 1..max_n.

        score = |shared n-grams| / |n-grams of the input|. Orders with a zero
        best score are skipped, sentences identical to the input never
        qualify and ties go to the lowest corpus index.

        Raises:
            ValueError: When the corpus holds fewer than two sentences
        """
        if len(self.sentences) < 2:
            raise ValueError(
                f"Hard negatives need a corpus of at least 2 sentences, got {len(self.sentences)}"
            )
        query = tuple(sentence)
        found: List[NgramCandidate] = []
        for n in range(1, self.max_n + 1):
            grams = ngrams(query, n)
            if not grams:
                continue
            shared: Counter[int] = Counter()
            for gram in grams:
                shared.update(self._postings[n].get(gram, ()))
            best: Optional[Tuple[int, int]] = None
            for index, count in shared.items():
                if self.sentences[index] == query:
                    continue
                if best is None or (-count, index) < (-best[1], best[0]):
                    best = (index, count)
            if best is not None:
                index, count = best
                found.append(NgramCandidate(n, index, count / len(grams), self.sentences[index]))
        return found


def ngram_hard_negatives(
    corpus: Sequence[Sequence[str]],
    sentence: Sequence[str],
) -> List[NgramCandidate]:
    """Up to four n-gram hard negatives for ``sentence``, one per n."""
    return NgramIndex(corpus).candidates(sentence)


def perturb(
    sentence: Sequence[str],
    rng: np.random.Generator,
    vocabulary: Sequence[str] = (),
) -> Sentence:
    """
    Corrupt a sentence by token deletion, replacement or permutation.

    The operation is drawn uniformly. Deleting from a one-token sentence, or
    permuting a sentence with no distinct reordering, falls back to
    replacement. Permutation always yields a different order.

    Args:
        sentence: Tokens to corrupt
        rng: Random generator
        vocabulary: Words to draw replacements from

    Returns:
        The corrupted sentence
    """
    tokens = list(sentence)
    if not tokens:
        raise ValueError("Cannot perturb an empty sentence")

    operation = ("delete", "replace", "permute")[int(rng.integers(3))]
    if operation == "delete" and len(tokens) < 2:
        operation = "replace"
    if operation == "permute" and len(set(tokens)) < 2:
        operation = "replace"

    if operation == "delete":
        del tokens[int(rng.integers(len(tokens)))]
        return tuple(tokens)

    if operation == "permute":
        while True:
            shuffled = [tokens[i] for i in rng.permutation(len(tokens))]
            if shuffled != tokens:
                return tuple(shuffled)

    position = int(rng.integers(len(tokens)))
    choices = sorted({w for w in vocabulary if w != tokens[position]})
    if not choices:
        if len(tokens) >= 2:
            del tokens[position]
        else:
            logger.debug("No replacement word available, sentence left unchanged")
        return tuple(tokens)
    tokens[position] = choices[int(rng.integers(len(choices)))]
    return tuple(tokens)


class HpsiSampler:
    """Draws HPSI examples from a parallel corpus with per-side n-gram indexes."""

    def __init__(self, pairs: Sequence[ParallelPair]) -> None:
        if not pairs:
            raise ValueError("HPSI needs a non-empty parallel corpus")
        self.pairs = list(pairs)
        self.indexes = (
            NgramIndex([p.source for p in self.pairs]),
            NgramIndex([p.target for p in self.pairs]),
        )
        self.vocabularies = (
            sorted({w for p in self.pairs for w in p.source}),
            sorted({w for p in self.pairs for w in p.target}),
        )

    def sample(self, rng: np.random.Generator, pair: Optional[ParallelPair] = None) -> HpsiExample:
        if pair is None:
            pair = self.pairs[int(rng.integers(len(self.pairs)))]
        if rng.random() < PARALLEL_PROBABILITY:
            return HpsiExample(pair.source, pair.target, 1, NegativeSource.NONE)

        side = int(rng.random() < 0.5)  # 0 replaces the source, 1 the target
        original = (pair.source, pair.target)[side]
        replacement: Optional[Sentence] = None
        source = NegativeSource.PERTURB

        if rng.random() < NGRAM_PROBABILITY:
            try:
                candidates = self.indexes[side].candidates(original)
            except ValueError:
                candidates = []
            if candidates:
                replacement = candidates[int(rng.integers(len(candidates)))].sentence
                source = NegativeSource.NGRAM
            else:
                logger.debug("No n-gram candidate, falling back to perturbation")

        if replacement is None:
            replacement = perturb(original, rng, self.vocabularies[side])

        if side == 0:
            return HpsiExample(replacement, pair.target, 0, source)
        return HpsiExample(pair.source, replacement, 0, source)


def hpsi_sample(pairs: Sequence[ParallelPair], rng: np.random.Generator) -> HpsiExample:
    """One HPSI example drawn from ``pairs``."""
    return HpsiSampler(pairs).sample(rng)

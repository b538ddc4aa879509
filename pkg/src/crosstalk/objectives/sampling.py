"""
Seeding and language-balanced sampling for example builders.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

T = TypeVar("T")


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for one builder worker, derived from the run seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def balanced_batch(
    pool_a: Sequence[T],
    pool_b: Sequence[T],
    batch_size: int,
    rng: np.random.Generator,
) -> List[T]:
    """
    Draw ``batch_size`` items, each from pool_a or pool_b with probability 0.5.

    Raises:
        ValueError: When either pool is empty
    """
    if not pool_a or not pool_b:
        raise ValueError("balanced_batch needs two non-empty pools")
    batch: List[T] = []
    for _ in range(batch_size):
        pool = pool_a if rng.random() < 0.5 else pool_b
        batch.append(pool[int(rng.integers(len(pool)))])
    return batch


def split_languages(
    items: Sequence[T],
    language: Callable[[T], str],
) -> Optional[Tuple[List[T], List[T]]]:
    """Two pools by language tag, or None unless exactly two languages occur."""
    pools: Dict[str, List[T]] = defaultdict(list)
    for item in items:
        pools[language(item)].append(item)
    if len(pools) != 2:
        return None
    first, second = sorted(pools)
    return pools[first], pools[second]


class LanguageBalancedSampler:
    """Batches balanced over two language pools, uniform when there is no such split."""

    def __init__(self, items: Sequence[T], language: Callable[[T], str]) -> None:
        if not items:
            raise ValueError("Cannot sample from an empty pool")
        self.items = list(items)
        self.pools = split_languages(self.items, language)

    @property
    def balanced(self) -> bool:
        return self.pools is not None

    def batch(self, batch_size: int, rng: np.random.Generator) -> List[T]:
        if self.pools is not None:
            return balanced_batch(self.pools[0], self.pools[1], batch_size, rng)
        return [self.items[int(i)] for i in rng.integers(len(self.items), size=batch_size)]

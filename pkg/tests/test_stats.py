"""Tests for dataset statistics."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosstalk.corpus.stats import compute_stats
from crosstalk.models import DatasetStats
from tests.factories import toy_csrl, toy_dialogues


def test_counts_toy_corpus():
    stats = compute_stats(toy_csrl(20))

    assert stats.dialogues == 20
    assert stats.utterances == 40
    assert stats.predicates == 30
    assert stats.arguments == 60
    assert stats.cross_arguments == 20
    assert stats.cross_ratio == pytest.approx(1 / 3)
    assert stats.mean_tokens_per_utterance == pytest.approx(4.5)


def test_empty_dataset_is_all_zeros():
    stats = compute_stats([])
    assert stats == DatasetStats()
    assert stats.cross_ratio == 0.0


def test_to_dict_rounds():
    report = compute_stats(toy_csrl(20)).to_dict()
    assert report["cross_ratio"] == 0.3333
    assert report["mean_tokens_per_utterance"] == 4.5


CORPUS = toy_csrl(6) + toy_dialogues()


@given(st.permutations(CORPUS))
def test_order_of_dialogues_does_not_matter(shuffled):
    assert compute_stats(shuffled) == compute_stats(CORPUS)

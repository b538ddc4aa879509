"""Tests for the vocabulary and context serialization."""

import pytest

from crosstalk.errors import CorpusError
from crosstalk.model.vocab import CLS, MASK, PAD, SEP, UNK, Vocabulary, tokenize_context
from crosstalk.models import Frame, Span
from tests.factories import make_dialogue


@pytest.fixture
def vocab():
    return Vocabulary.build([["a", "b", "a"], ["c"]])


def test_specials_come_first(vocab):
    assert vocab.tokens[:5] == [PAD, UNK, CLS, SEP, MASK]
    assert (vocab.pad_id, vocab.cls_id, vocab.sep_id, vocab.mask_id) == (0, 2, 3, 4)


def test_words_sorted_by_frequency_then_pieces(vocab):
    assert vocab.tokens[5:8] == ["a", "b", "c"]
    assert vocab.tokens[8:] == ["##a", "##b", "##c"]


def test_unknown_word_falls_back_to_pieces(vocab):
    assert vocab.tokenize_word("a") == [vocab.id("a")]
    assert vocab.tokenize_word("ab") == [vocab.id("##a"), vocab.id("##b")]
    assert vocab.tokenize_word("xyz") == [vocab.id(UNK)]
    assert vocab.tokenize_word(MASK) == [vocab.id(UNK)]


def test_min_count_and_max_size():
    vocab = Vocabulary.build([["a", "a", "b", "c", "c", "c"]], min_count=2, max_size=1)
    assert "c" in vocab
    assert "a" not in vocab


def test_rejects_missing_specials():
    with pytest.raises(ValueError):
        Vocabulary(["a", "b"])


def test_encode_pair_word_map(vocab):
    ids, word_ids = vocab.encode_pair(["a"], ["b", "ab"])
    assert ids == [
        vocab.cls_id, vocab.id("a"), vocab.sep_id,
        vocab.id("b"), vocab.id("##a"), vocab.id("##b"), vocab.sep_id,
    ]
    assert word_ids == [-1, 0, -1, 1, 2, 2, -1]


class TestTokenizeContext:
    @pytest.fixture
    def dialogue(self):
        return make_dialogue("d", [("A", "a b"), ("B", "c"), ("A", "a c b")])

    @pytest.fixture
    def vocab(self):
        return Vocabulary.build([["a", "b", "c"]])

    def test_serializes_whole_context(self, dialogue, vocab):
        ctx = tokenize_context(dialogue, None, 64, vocab)

        assert ctx.input_ids[0] == vocab.cls_id
        assert ctx.input_ids.count(vocab.sep_id) == 3
        assert ctx.word_count == 6
        assert ctx.word_utterances == (0, 0, 1, 2, 2, 2)
        assert ctx.word_speakers == (1, 1, 2, 1, 1, 1)
        assert ctx.word_turns == (1, 1, 2, 3, 3, 3)
        assert ctx.word_starts() == [1, 2, 4, 6, 7, 8]

    def test_context_ends_at_predicate_utterance(self, dialogue, vocab):
        ctx = tokenize_context(dialogue, Frame(Span(1, 0, 0)), 64, vocab)
        assert ctx.utterance_indices == (0, 1)
        assert ctx.word_predicate == (0, 0, 1)

    def test_drops_oldest_utterances_to_fit(self, dialogue, vocab):
        # [CLS] + "a b [SEP]" + "c [SEP]" + "a c b [SEP]" = 10 subtokens
        ctx = tokenize_context(dialogue, None, 7, vocab)

        assert ctx.utterance_indices == (1, 2)
        assert ctx.dropped_words == 2
        assert len(ctx.input_ids) <= 7
        assert ctx.word_positions(dialogue)[0] == (1, 0)

    def test_last_utterance_is_never_dropped(self, dialogue, vocab):
        with pytest.raises(CorpusError, match="alone needs"):
            tokenize_context(dialogue, None, 4, vocab)

    def test_turn_clipping_and_speaker_override(self, dialogue, vocab):
        ctx = tokenize_context(dialogue, None, 64, vocab, speaker_ids=[0, 2, 1], max_turns=3)
        assert max(ctx.word_turns) == 2
        assert ctx.utterance_speakers == (0, 2, 1)

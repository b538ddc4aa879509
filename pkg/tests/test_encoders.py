"""Tests for the SC-Encoder, PA-Encoder and the assembled model."""

import pytest
import torch
from torch.autograd import gradcheck

from crosstalk.config import ModelConfig
from crosstalk.model.batching import collate
from crosstalk.model.csrl import CsrlModel
from crosstalk.model.layers import ConcatStack, swish
from crosstalk.model.pa_encoder import (
    PredicateArgumentEncoder,
    RoleProjection,
    label_distribution,
    pa_encode,
    role_project,
)
from crosstalk.model.sc_encoder import (
    FusionLayer,
    StructureAwareEncoder,
    UtteranceEncoder,
    fuse,
    utterance_pool,
    word_level_encode,
)
from crosstalk.model.vocab import Vocabulary, tokenize_context
from tests.factories import TINY_MODEL, toy_csrl


def _config(**changes):
    return ModelConfig(**{**TINY_MODEL, **changes})


def test_default_widths():
    config = ModelConfig()
    sc = StructureAwareEncoder(config, 4 * config.backbone_hidden)
    pa = PredicateArgumentEncoder(config, num_tags=17)
    assert sc.word_stack.output_width == 288
    assert pa.stack.output_width == 144


@pytest.mark.parametrize("layers", [0, 1, 2, 3])
def test_word_stack_width(layers):
    config = _config(word_layers=layers)
    h, d = config.backbone_hidden, config.hidden_size
    sc = StructureAwareEncoder(config, 4 * h)
    assert sc.word_stack.output_width == 4 * h + config.turn_dim + config.speaker_dim + layers * d


@pytest.mark.parametrize("layers", [0, 1, 2, 3])
def test_pa_stack_width(layers):
    config = _config(pa_layers=layers)
    d = config.hidden_size
    pa = PredicateArgumentEncoder(config, num_tags=5)
    assert pa.stack.output_width == d + config.predicate_dim + layers * d
    g = torch.randn(2, 3, d)
    assert pa(g, torch.zeros(2, 3, dtype=torch.long)).shape == (2, 3, 5)


class TestUtterancePool:
    def test_max_pools_per_utterance(self):
        s = torch.tensor([[1.0, 5.0], [3.0, 2.0], [-1.0, -4.0]])
        pooled = utterance_pool(s, torch.tensor([0, 0, 1]))
        assert torch.equal(pooled, torch.tensor([[3.0, 5.0], [-1.0, -4.0]]))

    def test_batched_padding_is_zero(self):
        s = torch.randn(2, 3, 4)
        word_utterances = torch.tensor([[0, 1, 1], [0, 0, 0]])
        word_mask = torch.tensor([[True, True, True], [True, True, False]])
        utterance_mask = torch.tensor([[True, True], [True, False]])

        pooled = utterance_pool(s, word_utterances, word_mask, utterance_mask)

        assert pooled.shape == (2, 2, 4)
        assert torch.equal(pooled[1, 1], torch.zeros(4))
        assert torch.equal(pooled[1, 0], s[1, :2].max(0).values)

    def test_rejects_utterance_without_words(self):
        s = torch.randn(1, 2, 4)
        with pytest.raises(ValueError, match="no words"):
            utterance_pool(
                s,
                torch.tensor([[0, 2]]),
                torch.tensor([[True, True]]),
                torch.tensor([[True, True, True]]),
            )


def test_utterance_encoder_respects_lengths():
    encoder = UtteranceEncoder(6, 4, num_layers=2, dropout=0.0).eval()
    u = torch.randn(1, 2, 6)
    padded = torch.cat([u, torch.randn(1, 3, 6)], dim=1)

    out = encoder(padded, torch.tensor([2]))

    assert out.shape == (1, 5, 4)
    assert torch.allclose(out[:, :2], encoder(u), atol=1e-5)


def test_utterance_encoder_reads_later_utterances():
    encoder = UtteranceEncoder(6, 4, num_layers=1, dropout=0.0).eval()
    u = torch.randn(1, 3, 6)
    changed = u.clone()
    changed[0, 2] += 1.0

    with torch.no_grad():
        before, after = encoder(u), encoder(changed)

    assert not torch.allclose(before[0, 0], after[0, 0])


def test_fuse_with_zero_weights_is_zero():
    layer = FusionLayer(5, 4)
    with torch.no_grad():
        layer.linear.weight.zero_()
        layer.linear.bias.zero_()

    g = fuse(torch.randn(3, 5), torch.randn(2, 4), torch.tensor([0, 0, 1]), layer)

    assert torch.equal(g, torch.zeros(3, 4))


def test_fuse_broadcasts_utterance_vector_to_its_words():
    layer = FusionLayer(5, 4)
    with torch.no_grad():
        layer.linear.weight.zero_()
        layer.linear.weight[:, 5:] = torch.eye(4)
        layer.linear.bias.zero_()
    u_prime = torch.randn(2, 4)

    g = fuse(torch.randn(3, 5), u_prime, torch.tensor([0, 0, 1]), layer)

    assert torch.allclose(g[0], g[1])
    assert torch.allclose(g[0], swish(u_prime[0]))
    assert torch.allclose(g[2], swish(u_prime[1]))


def test_pa_encoder_depends_on_predicate_indicator():
    encoder = PredicateArgumentEncoder(_config(pa_layers=1), num_tags=5).eval()
    g = torch.randn(1, 4, encoder.stack.in_width - encoder.predicate.embedding_dim)
    first = torch.tensor([[0, 1, 0, 0]])
    second = torch.tensor([[0, 0, 0, 1]])

    with torch.no_grad():
        a, b = encoder(g, first), encoder(g, second)

    assert not torch.allclose(a[0, 1], b[0, 1])
    assert not torch.allclose(a[0, 0], b[0, 0])


def test_fusion_rejects_wrong_widths():
    layer = FusionLayer(10, 4)
    with pytest.raises(ValueError, match="Fusion expects"):
        layer(torch.randn(3, 9), torch.randn(1, 4), torch.zeros(3, dtype=torch.long))


def test_word_encode_and_fuse_gradients():
    torch.manual_seed(0)
    stack = ConcatStack(8, 4, 1, 2, 8, dropout=0.0).double()
    fusion = FusionLayer(12, 4).double()
    t = torch.randn(1, 3, 2, dtype=torch.double)
    r = torch.randn(1, 3, 2, dtype=torch.double)
    word_utterances = torch.tensor([[0, 0, 1]])

    def run(e, u_prime):
        s = word_level_encode(e, t, r, stack)
        return fuse(s, u_prime, word_utterances, fusion)

    e = torch.randn(1, 3, 4, dtype=torch.double, requires_grad=True)
    u_prime = torch.randn(1, 2, 4, dtype=torch.double, requires_grad=True)
    assert gradcheck(run, (e, u_prime), eps=1e-6, atol=1e-4)


def test_pa_encode_and_projection_gradients():
    torch.manual_seed(0)
    stack = ConcatStack(6, 4, 1, 2, 8, dropout=0.0).double()
    projection = RoleProjection(stack.output_width, 5).double()
    p = torch.randn(1, 3, 2, dtype=torch.double)

    def run(g):
        return role_project(pa_encode(g, p, stack), projection)

    g = torch.randn(1, 3, 4, dtype=torch.double, requires_grad=True)
    assert gradcheck(run, (g,), eps=1e-6, atol=1e-4)


def test_pa_encode_rejects_wrong_width():
    stack = ConcatStack(6, 4, 1, 2, 8)
    with pytest.raises(ValueError):
        pa_encode(torch.randn(3, 4), torch.randn(3, 3), stack)


def test_label_distribution_sums_to_one():
    probabilities = label_distribution(torch.randn(2, 3, 5))
    assert torch.allclose(probabilities.sum(-1), torch.ones(2, 3))


class TestCsrlModel:
    @pytest.fixture
    def batch_and_model(self, inventory):
        items = toy_csrl(3)
        vocab = Vocabulary.build(u.tokens for item in items for u in item.dialogue.utterances)
        config = _config()
        contexts = [
            tokenize_context(item.dialogue, frame, config.max_len, vocab)
            for item in items
            for frame in item.frames
        ]
        model = CsrlModel(config, len(vocab), len(inventory)).eval()
        return collate(contexts, vocab.pad_id, config.max_speakers), model

    def test_tag_logits_shape(self, batch_and_model, inventory):
        batch, model = batch_and_model
        logits = model.tag_logits(batch)
        assert logits.shape == (batch.size, batch.word_mask.size(1), len(inventory))
        assert model.predict_tags(batch).shape == batch.word_mask.shape

    def test_sai_bypasses_structure_encoder(self, batch_and_model):
        batch, model = batch_and_model
        with torch.no_grad():
            before = model.sai_logits(batch)
            for p in model.sc.parameters():
                p.add_(1.0)
            assert torch.equal(before, model.sai_logits(batch))
            assert model.utterance_states(batch).shape[-1] == model.config.hidden_size

    def test_blocks(self, batch_and_model):
        _, model = batch_and_model
        assert list(model.blocks()) == ["backbone", "sc", "pa", "heads"]

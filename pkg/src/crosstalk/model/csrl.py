"""
The full CSRL model: backbone, SC-Encoder, PA-Encoder and pre-training heads.
"""

from __future__ import annotations

from typing import Dict, Optional

import torch
import torch.nn as nn

from crosstalk.config import ModelConfig
from crosstalk.model.backbone import Backbone, BackboneConfig
from crosstalk.model.batching import ContextBatch, PairBatch
from crosstalk.model.heads import PretrainingHeads, restrict
from crosstalk.model.pa_encoder import PredicateArgumentEncoder, label_distribution
from crosstalk.model.sc_encoder import StructureAwareEncoder

BLOCKS = ("backbone", "sc", "pa", "heads")


class CsrlModel(nn.Module):
    """
    Hierarchical encoder stack with one checkpoint block per module.

    The same parameters serve every stage: pre-training reads out of the
    backbone (TLM, HPSI), the SC-Encoder (SPI, UOR) or the PA-Encoder over
    bridged backbone states (SAI); CSRL runs the whole stack.
    """

    def __init__(self, config: ModelConfig, vocab_size: int, num_tags: int) -> None:
        super().__init__()
        self.config = config
        self.backbone = Backbone(BackboneConfig.from_model_config(config, vocab_size))
        self.sc = StructureAwareEncoder(config, self.backbone.output_width)
        self.pa = PredicateArgumentEncoder(config, num_tags)
        self.heads = PretrainingHeads(config, self.backbone.output_width, vocab_size)

    @property
    def num_tags(self) -> int:
        return self.pa.projection.num_tags

    @property
    def device(self) -> torch.device:
        return next(self.parameters()).device

    def blocks(self) -> Dict[str, nn.Module]:
        """Parameter blocks in checkpoint order."""
        return {name: getattr(self, name) for name in BLOCKS}

    def word_states(self, batch: ContextBatch) -> torch.Tensor:
        """Backbone word representations e, (B, W, 4h)."""
        subtokens = self.backbone(batch.input_ids, batch.attention_mask)
        return self.backbone.pool_words(
            subtokens, batch.word_starts, batch.subtoken_words, batch.word_mask
        )

    def tag_logits(self, batch: ContextBatch, use_sc: Optional[bool] = None) -> torch.Tensor:
        """Role scores l per word, (B, W, |L|)."""
        use_sc = self.config.use_sc_encoder if use_sc is None else use_sc
        e = self.word_states(batch)
        g = self.sc(e, batch).words if use_sc else self.heads.sai_bridge(e)
        return self.pa(g, batch.word_predicate, batch.word_mask)

    def sai_logits(self, batch: ContextBatch) -> torch.Tensor:
        return self.tag_logits(batch, use_sc=False)

    @torch.no_grad()
    def predict_tags(self, batch: ContextBatch) -> torch.Tensor:
        """Argmax tag id per word, (B, W)."""
        return label_distribution(self.tag_logits(batch)).argmax(-1)

    def tlm_logits(self, pairs: PairBatch) -> torch.Tensor:
        """(B, T, V) scores over the vocabulary at every subtoken."""
        return self.heads.tlm(self.backbone(pairs.input_ids, pairs.attention_mask))

    def hpsi_logits(self, pairs: PairBatch) -> torch.Tensor:
        """(B, 2) parallel / non-parallel scores from the ``[CLS]`` vector."""
        states = self.backbone(pairs.input_ids, pairs.attention_mask)
        return self.heads.hpsi(states[:, 0])

    def utterance_states(self, batch: ContextBatch) -> torch.Tensor:
        """u', (B, N, d)."""
        return self.sc(self.word_states(batch), batch).utterances

    def spi_logits(self, batch: ContextBatch) -> torch.Tensor:
        """(B, N, max_speakers + 1) speaker scores, restricted to the dialogue's speakers."""
        logits = self.heads.spi(self.utterance_states(batch))
        return restrict(logits, batch.candidates) if batch.candidates is not None else logits

    def uor_logits(self, batch: ContextBatch) -> torch.Tensor:
        """(B, N, max_utterances) position scores, restricted to the shuffled suffix."""
        logits = self.heads.uor(self.utterance_states(batch))
        return restrict(logits, batch.candidates) if batch.candidates is not None else logits

"""
Neural model: backbone, hierarchical encoders, heads and batching.
"""

from crosstalk.model.backbone import Backbone, BackboneConfig, encode
from crosstalk.model.batching import (
    IGNORE_INDEX,
    ContextBatch,
    PairBatch,
    collate,
    collate_pairs,
)
from crosstalk.model.csrl import BLOCKS, CsrlModel
from crosstalk.model.layers import (
    ConcatStack,
    MTransLayer,
    MTransVariant,
    mtrans_forward,
    swish,
)
from crosstalk.model.pa_encoder import (
    PredicateArgumentEncoder,
    RoleProjection,
    label_distribution,
    pa_encode,
    role_project,
)
from crosstalk.model.sc_encoder import (
    FusionLayer,
    IndicatorEmbeddings,
    StructureAwareEncoder,
    UtteranceEncoder,
    fuse,
    utterance_pool,
    utterance_seq_encode,
    word_level_encode,
)
from crosstalk.model.vocab import TokenizedContext, Vocabulary, tokenize_context

__all__ = [
    "Backbone",
    "BackboneConfig",
    "encode",
    "IGNORE_INDEX",
    "ContextBatch",
    "PairBatch",
    "collate",
    "collate_pairs",
    "BLOCKS",
    "CsrlModel",
    "ConcatStack",
    "MTransLayer",
    "MTransVariant",
    "mtrans_forward",
    "swish",
    "PredicateArgumentEncoder",
    "RoleProjection",
    "label_distribution",
    "pa_encode",
    "role_project",
    "FusionLayer",
    "IndicatorEmbeddings",
    "StructureAwareEncoder",
    "UtteranceEncoder",
    "fuse",
    "utterance_pool",
    "utterance_seq_encode",
    "word_level_encode",
    "TokenizedContext",
    "Vocabulary",
    "tokenize_context",
]

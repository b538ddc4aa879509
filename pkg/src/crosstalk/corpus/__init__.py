"""
Corpus data model: loaders, BIO codec and dataset statistics.
"""

from crosstalk.corpus.codec import DecodedSpan, bio_decode, bio_encode, context_positions
from crosstalk.corpus.loaders import SAI_ROLES, load_dialogues, load_parallel, load_srl
from crosstalk.corpus.stats import compute_stats

__all__ = [
    "DecodedSpan",
    "bio_decode",
    "bio_encode",
    "context_positions",
    "SAI_ROLES",
    "load_dialogues",
    "load_parallel",
    "load_srl",
    "compute_stats",
]

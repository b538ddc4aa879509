"""
Pre-training objectives: example builders, samplers and losses.
"""

from crosstalk.objectives.dialogue import (
    SpiExample,
    UorExample,
    clause_units,
    spi_corrupt,
    uor_shuffle,
)
from crosstalk.objectives.dump import build_examples, dump_examples
from crosstalk.objectives.hpsi import (
    HpsiExample,
    HpsiSampler,
    NegativeSource,
    NgramIndex,
    hpsi_sample,
    ngram_hard_negatives,
    perturb,
)
from crosstalk.objectives.losses import ObjectiveId, objective_loss
from crosstalk.objectives.sai import SaiExample, sai_build
from crosstalk.objectives.sampling import (
    LanguageBalancedSampler,
    balanced_batch,
    derive_rng,
)
from crosstalk.objectives.tlm import TlmExample, tlm_corrupt

__all__ = [
    "SpiExample",
    "UorExample",
    "clause_units",
    "spi_corrupt",
    "uor_shuffle",
    "build_examples",
    "dump_examples",
    "HpsiExample",
    "HpsiSampler",
    "NegativeSource",
    "NgramIndex",
    "hpsi_sample",
    "ngram_hard_negatives",
    "perturb",
    "ObjectiveId",
    "objective_loss",
    "SaiExample",
    "sai_build",
    "LanguageBalancedSampler",
    "balanced_batch",
    "derive_rng",
    "TlmExample",
    "tlm_corrupt",
]

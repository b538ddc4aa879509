"""
Stage implementations for the training pipeline.

Each stage handles one step of the run:
- ClmStage: TLM + HPSI on parallel pairs
- ScStage: SPI + UOR on dialogues, backbone frozen
- PaStage: SAI on SRL samples, backbone and SC-Encoder frozen
- End2EndStage: all objectives jointly, nothing frozen
- CsrlStage: CSRL training
"""

from crosstalk.stages.csrl import CsrlStage
from crosstalk.stages.pretraining import ClmStage, End2EndStage, PaStage, PretrainStage, ScStage

__all__ = [
    "ClmStage",
    "CsrlStage",
    "End2EndStage",
    "PaStage",
    "PretrainStage",
    "ScStage",
]

"""
crosstalk - zero-shot cross-lingual conversational semantic role labeling.

A model trained on annotated dialogues in one language labels the
predicate-argument structure of dialogues in another:
    Parallel pairs → Dialogues → SRL samples → Annotated dialogues

Pre-training runs in stages (clm, sc, pa), each freezing what the earlier
stages trained, before CSRL training over the whole stack.
"""

from crosstalk.config import CrosstalkConfig, configure, get_config
from crosstalk.models import StageResult, StageStatus
from crosstalk.pipeline import Pipeline, PipelineResult, StageContext

__version__ = "0.1.0"

__all__ = [
    # Config
    "configure",
    "get_config",
    "CrosstalkConfig",
    # Pipeline
    "Pipeline",
    "PipelineResult",
    "StageContext",
    # Models
    "StageResult",
    "StageStatus",
    # Version
    "__version__",
]

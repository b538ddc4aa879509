"""
Pipeline orchestration for staged training.
"""

from crosstalk.pipeline.core import Pipeline, PipelineResult
from crosstalk.pipeline.stage import Stage, StageContext

__all__ = [
    "Pipeline",
    "PipelineResult",
    "Stage",
    "StageContext",
]

"""
Tuple-based evaluation of CSRL predictions.
"""

from crosstalk.evaluation.predictions import (
    gold_tuples,
    load_predictions,
    score_predictions,
    write_predictions,
)
from crosstalk.evaluation.scoring import (
    BucketScore,
    ScoreReport,
    extract_tuples,
    frame_key,
    frame_tuples,
    score,
)

__all__ = [
    "gold_tuples",
    "load_predictions",
    "score_predictions",
    "write_predictions",
    "BucketScore",
    "ScoreReport",
    "extract_tuples",
    "frame_key",
    "frame_tuples",
    "score",
]

"""
Linear warmup / linear decay learning-rate schedule.
"""

from __future__ import annotations

import math

from crosstalk.config import TrainConfig


def warmup_steps(total_steps: int, warmup_fraction: float) -> int:
    return max(1, math.ceil(warmup_fraction * total_steps))


def lr_at(step: int, total_steps: int, cfg: TrainConfig, lm: bool = False) -> float:
    """
    Learning rate at ``step`` of ``total_steps``.

    Rises linearly from 0 to the max rate over the warmup steps, then falls
    linearly to the min rate at ``total_steps``. ``lm=True`` uses the
    language-model curve (``lm_max_lr`` / ``lm_min_lr``).

    Raises:
        ValueError: When step is outside [0, total_steps] or total_steps < 1
    """
    if total_steps < 1:
        raise ValueError(f"total_steps must be >= 1, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} is outside [0, {total_steps}]")

    high, low = (cfg.lm_max_lr, cfg.lm_min_lr) if lm else (cfg.max_lr, cfg.min_lr)
    warmup = warmup_steps(total_steps, cfg.warmup_fraction)
    if step < warmup:
        return high * step / warmup
    if total_steps == warmup:
        return low
    progress = (step - warmup) / (total_steps - warmup)
    return high + (low - high) * progress

"""
Exception types shared across crosstalk.

The CLI maps each family to its own exit code, so loaders, trainers and
checkpoint code raise these instead of bare ``RuntimeError``.
"""

from __future__ import annotations


class CrosstalkError(Exception):
    """Base class for crosstalk errors."""


class ConfigError(CrosstalkError, ValueError):
    """Invalid configuration key or value."""


class CorpusError(CrosstalkError, ValueError):
    """Malformed record or violated corpus invariant."""


class StageOrderError(CrosstalkError):
    """A training stage was requested out of order."""


class CheckpointMismatchError(CrosstalkError):
    """Checkpoint is incompatible with the data or fails verification."""

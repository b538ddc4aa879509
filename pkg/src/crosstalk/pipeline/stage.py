"""
Base stage definition for pipeline execution.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional, Sequence

from crosstalk.config import CrosstalkConfig, get_config
from crosstalk.models import AnnotatedDialogue, LabelInventory, StageResult, StageStatus
from crosstalk.training.checkpoint import Checkpoint
from crosstalk.training.trainer import MetricsLog, PretrainData, Trainer, build_vocabulary

logger = logging.getLogger(__name__)


@dataclass
class StageContext:
    """
    State threaded through the stages of one run.

    ``checkpoint`` is the most recent model state; every completed stage
    replaces it with its own output.
    """

    data: PretrainData = field(default_factory=PretrainData)
    train: List[AnnotatedDialogue] = field(default_factory=list)
    dev: List[AnnotatedDialogue] = field(default_factory=list)
    checkpoint: Optional[Checkpoint] = None
    inventory: Optional[LabelInventory] = None
    metrics: Optional[MetricsLog] = None
    previous_results: List[StageResult] = field(default_factory=list)

    def get_result(self, stage_name: str) -> Optional[StageResult]:
        """Get result from a previous stage."""
        for result in self.previous_results:
            if result.stage_name == stage_name:
                return result
        return None

    def trainer(self, config: CrosstalkConfig) -> Trainer:
        """A trainer resuming from the current checkpoint, or a fresh one."""
        if self.checkpoint is not None:
            return Trainer.from_checkpoint(self.checkpoint, config, self.inventory, self.metrics)
        vocab = build_vocabulary(self.data, self.train, self.dev)
        return Trainer.fresh(config, vocab, self.inventory, self.metrics)


class Stage(ABC):
    """
    Base class for pipeline stages.

    Each stage handles one step of the training sequence.
    Subclasses implement the `execute` method with stage-specific logic.
    """

    name: str = "base"
    description: str = "Base stage"

    def __init__(self, config: Optional[CrosstalkConfig] = None) -> None:
        self.config = config or get_config()

    @abstractmethod
    def execute(self, ctx: StageContext) -> StageResult:
        """
        Execute the stage.

        Args:
            ctx: Stage context with data, current checkpoint and previous results

        Returns:
            StageResult with execution outcome
        """
        ...

    def should_skip(self, ctx: StageContext) -> bool:
        """
        Check if this stage should be skipped.

        Override to implement skip logic based on context.

        Args:
            ctx: Stage context

        Returns:
            True if stage should be skipped
        """
        return False

    def on_skip(self, ctx: StageContext) -> Optional[Checkpoint]:
        """Checkpoint to carry forward when the stage is skipped."""
        return ctx.checkpoint

    def run(self, ctx: StageContext) -> StageResult:
        """
        Run the stage with timing and error handling.

        Args:
            ctx: Stage context

        Returns:
            StageResult with execution outcome
        """
        started_at = datetime.now()

        try:
            if self.should_skip(ctx):
                ctx.checkpoint = self.on_skip(ctx)
                logger.info(f"Stage {self.name} skipped")
                return StageResult(
                    stage_name=self.name,
                    status=StageStatus.SKIPPED,
                    started_at=started_at,
                    completed_at=datetime.now(),
                    summary=f"Stage {self.name} skipped",
                    checkpoint=ctx.checkpoint,
                )

            if self.config.tracing_enabled:
                result = self._execute_with_telemetry(ctx, started_at)
            else:
                result = self.execute(ctx)
                result.started_at = started_at
                result.completed_at = datetime.now()

            if result.checkpoint is not None:
                ctx.checkpoint = result.checkpoint
            return result

        except Exception as e:
            logger.error(f"Stage {self.name} failed: {e}")
            return StageResult(
                stage_name=self.name,
                status=StageStatus.FAILED,
                started_at=started_at,
                completed_at=datetime.now(),
                summary=f"Stage {self.name} failed",
                error=str(e),
                exception=e,
            )

    def _execute_with_telemetry(self, ctx: StageContext, started_at: datetime) -> StageResult:
        """Execute stage with OpenTelemetry tracing."""
        try:
            from opentelemetry import trace
        except ImportError:
            result = self.execute(ctx)
            result.started_at = started_at
            result.completed_at = datetime.now()
            return result

        tracer = trace.get_tracer(self.config.otel_service_name)
        with tracer.start_as_current_span(
            f"crosstalk.stage.{self.name}",
            attributes={
                "crosstalk.stage.name": self.name,
                "crosstalk.stage.resumed": ctx.checkpoint is not None,
                "crosstalk.train.seed": self.config.train.seed,
            },
        ) as span:
            result = self.execute(ctx)
            result.started_at = started_at
            result.completed_at = datetime.now()

            span.set_attribute("crosstalk.stage.status", result.status.value)
            for objective, loss in result.losses.items():
                span.set_attribute(f"crosstalk.loss.{objective}", loss)
            if result.error:
                span.set_attribute("crosstalk.stage.error", result.error)

            return result


def final_losses(history: Sequence[Dict[str, float]]) -> Dict[str, float]:
    """Losses of the last optimization step, or nothing for an empty run."""
    return dict(history[-1]) if history else {}

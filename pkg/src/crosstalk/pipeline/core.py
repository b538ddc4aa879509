"""
Core pipeline orchestration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, List, Optional

from crosstalk.config import CrosstalkConfig, get_config
from crosstalk.models import StageResult, StageStatus
from crosstalk.pipeline.stage import Stage, StageContext
from crosstalk.training.checkpoint import Checkpoint

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    """Result of a complete pipeline execution."""

    name: str
    stage_results: List[StageResult] = field(default_factory=list)
    started_at: datetime = field(default_factory=datetime.now)
    completed_at: Optional[datetime] = None
    status: str = "running"
    checkpoint: Optional[Checkpoint] = None

    @property
    def successful(self) -> bool:
        """Check if all stages completed successfully."""
        return all(
            r.status in (StageStatus.COMPLETED, StageStatus.SKIPPED) for r in self.stage_results
        )

    @property
    def failed_stage(self) -> Optional[StageResult]:
        """Get the first failed stage, if any."""
        for result in self.stage_results:
            if result.status == StageStatus.FAILED:
                return result
        return None

    @property
    def duration_seconds(self) -> Optional[float]:
        """Get total pipeline duration."""
        if self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None

    def summary(self) -> str:
        """Generate a summary of the pipeline execution."""
        lines = [
            f"Pipeline Result for {self.name}",
            f"Status: {self.status}",
            f"Duration: {self.duration_seconds:.1f}s" if self.duration_seconds else "",
            "",
            "Stages:",
        ]

        for result in self.stage_results:
            status_icon = {
                StageStatus.COMPLETED: "✓",
                StageStatus.FAILED: "✗",
                StageStatus.SKIPPED: "○",
                StageStatus.PENDING: "·",
            }.get(result.status, "?")

            duration = f"({result.duration_seconds:.1f}s)" if result.duration_seconds else ""
            lines.append(f"  {status_icon} {result.stage_name} {duration}")
            if result.summary:
                lines.append(f"    {result.summary}")
            if result.error:
                lines.append(f"    error: {result.error}")

        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "successful": self.successful,
            "duration_seconds": self.duration_seconds,
            "stages": [r.to_dict() for r in self.stage_results],
        }


class Pipeline:
    """
    Multi-stage training pipeline.

    Runs stages in sequence, handing each the checkpoint produced by the
    one before, and halts on the first failure.
    """

    def __init__(
        self,
        stages: Optional[List[Stage]] = None,
        name: str = "custom",
        on_stage_complete: Optional[Callable[[StageResult], None]] = None,
        config: Optional[CrosstalkConfig] = None,
    ) -> None:
        """
        Initialize the pipeline.

        Args:
            stages: List of stages to execute
            name: Label used in logs, spans and the summary
            on_stage_complete: Callback when a stage completes
            config: Run configuration (defaults to the global one)
        """
        self.config = config or get_config()
        self.stages = stages or []
        self.name = name
        self.on_stage_complete = on_stage_complete

    @classmethod
    def hierarchical(cls, config: Optional[CrosstalkConfig] = None, **kwargs) -> "Pipeline":
        """
        Create the staged pipeline.

        Returns:
            Pipeline with clm, sc, pa and csrl stages
        """
        from crosstalk.stages import ClmStage, CsrlStage, PaStage, ScStage

        config = config or get_config()
        return cls(
            stages=[ClmStage(config), ScStage(config), PaStage(config), CsrlStage(config)],
            name="hierarchical",
            config=config,
            **kwargs,
        )

    @classmethod
    def end2end(cls, config: Optional[CrosstalkConfig] = None, **kwargs) -> "Pipeline":
        """Create a pipeline with joint pre-training followed by CSRL training."""
        from crosstalk.stages import CsrlStage, End2EndStage

        config = config or get_config()
        return cls(
            stages=[End2EndStage(config), CsrlStage(config)],
            name="end2end",
            config=config,
            **kwargs,
        )

    def run(self, ctx: StageContext) -> PipelineResult:
        """
        Run the pipeline.

        Args:
            ctx: Data and starting checkpoint for the run

        Returns:
            PipelineResult with all stage outcomes
        """
        result = PipelineResult(name=self.name)

        logger.info(f"Starting pipeline {self.name} ({len(self.stages)} stages)")

        if self.config.tracing_enabled:
            return self._run_with_telemetry(result, ctx)

        return self._run_stages(result, ctx)

    def _run_stages(self, result: PipelineResult, ctx: StageContext) -> PipelineResult:
        """Execute all stages in sequence."""
        for stage in self.stages:
            logger.info(f"Running stage: {stage.name}")

            stage_result = stage.run(ctx)
            result.stage_results.append(stage_result)
            ctx.previous_results.append(stage_result)
            result.checkpoint = ctx.checkpoint

            if self.on_stage_complete:
                self.on_stage_complete(stage_result)

            if stage_result.status == StageStatus.FAILED:
                logger.error(f"Stage {stage.name} failed: {stage_result.error}")
                result.status = "failed"
                result.completed_at = datetime.now()
                return result

        result.status = "completed"
        result.completed_at = datetime.now()
        logger.info(f"Pipeline {self.name} completed")

        return result

    def _run_with_telemetry(
        self,
        result: PipelineResult,
        ctx: StageContext,
    ) -> PipelineResult:
        """Run pipeline with OpenTelemetry tracing."""
        try:
            from opentelemetry import trace
        except ImportError:
            return self._run_stages(result, ctx)

        tracer = trace.get_tracer(self.config.otel_service_name)
        with tracer.start_as_current_span(
            "crosstalk.pipeline",
            attributes={
                "crosstalk.pipeline.name": self.name,
                "crosstalk.pipeline.stages": len(self.stages),
            },
        ) as span:
            result = self._run_stages(result, ctx)

            span.set_attribute("crosstalk.pipeline.status", result.status)
            span.set_attribute("crosstalk.pipeline.successful", result.successful)

            return result

"""
Pre-training stages: clm, sc and pa, plus joint end-to-end pre-training.
"""

from __future__ import annotations

from datetime import datetime
from typing import List

from crosstalk.config import ModelConfig
from crosstalk.models import StageName, StageResult, StageStatus
from crosstalk.objectives.losses import ObjectiveId
from crosstalk.pipeline.stage import Stage, StageContext, final_losses
from crosstalk.training.checkpoint import Checkpoint
from crosstalk.training.trainer import STAGE_OBJECTIVES


class PretrainStage(Stage):
    """One stage of hierarchical pre-training."""

    stage: StageName = StageName.CLM

    def _model_config(self, ctx: StageContext) -> ModelConfig:
        if ctx.checkpoint is not None:
            return ctx.checkpoint.config
        return self.config.model

    def objectives(self, ctx: StageContext) -> List[ObjectiveId]:
        if self.stage == StageName.SC and not self._model_config(ctx).use_sc_encoder:
            return []
        enabled = self.config.train.objectives
        return [o for o in STAGE_OBJECTIVES[self.stage] if o.value in enabled]

    def should_skip(self, ctx: StageContext) -> bool:
        """Skip when every objective of the stage is disabled."""
        return not self.objectives(ctx)

    def on_skip(self, ctx: StageContext) -> Checkpoint:
        """Record the stage on an otherwise unchanged checkpoint."""
        trainer = ctx.trainer(self.config)
        trainer.pretrain(self.stage, ctx.data)
        return trainer.checkpoint()

    def execute(self, ctx: StageContext) -> StageResult:
        trainer = ctx.trainer(self.config)
        history = trainer.pretrain(self.stage, ctx.data)
        losses = final_losses(history)
        names = ", ".join(o.value for o in self.objectives(ctx))
        return StageResult(
            stage_name=self.name,
            status=StageStatus.COMPLETED,
            started_at=datetime.now(),
            summary=f"{len(history)} steps on {names}, final loss {losses.get('total', 0.0):.4f}",
            checkpoint=trainer.checkpoint(),
            losses=losses,
            output={"steps": len(history), "digests": trainer.digests()},
        )


class ClmStage(PretrainStage):
    """Cross-lingual language model pre-training (TLM + HPSI) on parallel pairs."""

    name = "clm"
    description = "Pre-train the backbone on parallel sentence pairs"
    stage = StageName.CLM


class ScStage(PretrainStage):
    """Structure pre-training (SPI + UOR) with the backbone frozen."""

    name = "sc"
    description = "Pre-train the SC-Encoder on dialogues"
    stage = StageName.SC


class PaStage(PretrainStage):
    name = "pa"
    description = "Pre-train the PA-Encoder on SRL data"
    stage = StageName.PA


class End2EndStage(Stage):
    """
    Joint pre-training of every enabled objective with nothing frozen.

    The output checkpoint counts as having completed clm, sc and pa.
    """

    name = "end2end"
    description = "Pre-train all objectives jointly"

    def execute(self, ctx: StageContext) -> StageResult:
        trainer = ctx.trainer(self.config)
        history = trainer.pretrain_end2end(ctx.data)
        losses = final_losses(history)
        return StageResult(
            stage_name=self.name,
            status=StageStatus.COMPLETED,
            started_at=datetime.now(),
            summary=f"{len(history)} joint steps, final loss {losses.get('total', 0.0):.4f}",
            checkpoint=trainer.checkpoint(),
            losses=losses,
            output={"steps": len(history), "digests": trainer.digests()},
        )

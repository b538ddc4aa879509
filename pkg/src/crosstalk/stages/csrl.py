"""
CSRL training stage.
"""

from __future__ import annotations

from datetime import datetime

from crosstalk.models import StageResult, StageStatus
from crosstalk.pipeline.stage import Stage, StageContext


class CsrlStage(Stage):
    """
    Fine-tune the full stack on annotated dialogues.

    Uses the dev set, when the context has one, for early stopping and
    best-epoch restoration; the final dev scores land in ``scores``.
    """

    name = "csrl"
    description = "Train conversational SRL"

    def execute(self, ctx: StageContext) -> StageResult:
        trainer = ctx.trainer(self.config)
        summary = trainer.train_csrl(ctx.train, ctx.dev or None)

        scores = None
        if "best_f1_all" in summary:
            scores = {"f1_all": summary["best_f1_all"], "best_epoch": summary["best_epoch"]}
        text = f"{summary['epochs']} epochs, {summary['steps']} steps"
        if scores:
            text += f", best dev F1_all {scores['f1_all']:.4f}"
        if self.config.train.freeze_lm:
            text += " (language model frozen)"

        return StageResult(
            stage_name=self.name,
            status=StageStatus.COMPLETED,
            started_at=datetime.now(),
            summary=text,
            checkpoint=trainer.checkpoint(),
            scores=scores,
            output={**summary, "digests": trainer.digests()},
        )

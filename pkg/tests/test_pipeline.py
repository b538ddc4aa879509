"""Tests for pipeline orchestration and the training stages."""

from datetime import datetime

import pytest

from crosstalk.errors import StageOrderError
from crosstalk.models import StageResult, StageStatus
from crosstalk.pipeline import Pipeline, Stage, StageContext
from crosstalk.stages import ClmStage, CsrlStage, PaStage, ScStage
from tests.factories import tiny_config, toy_csrl


class Succeeds(Stage):
    name = "ok"

    def execute(self, ctx):
        return StageResult(
            stage_name=self.name,
            status=StageStatus.COMPLETED,
            started_at=datetime.now(),
            summary="all good",
        )


class Fails(Stage):
    name = "broken"

    def execute(self, ctx):
        raise RuntimeError("boom")


class Skips(Succeeds):
    name = "idle"

    def should_skip(self, ctx):
        return True


class TestOrchestration:
    def test_runs_in_order_and_reports(self, config):
        seen = []
        pipeline = Pipeline(
            [Succeeds(config), Skips(config)], on_stage_complete=seen.append, config=config
        )

        result = pipeline.run(StageContext())

        assert result.successful
        assert result.status == "completed"
        assert [r.stage_name for r in seen] == ["ok", "idle"]
        summary = result.summary()
        assert "✓ ok" in summary
        assert "○ idle" in summary

    def test_halts_on_first_failure(self, config):
        pipeline = Pipeline([Fails(config), Succeeds(config)], config=config)

        result = pipeline.run(StageContext())

        assert not result.successful
        assert result.status == "failed"
        assert len(result.stage_results) == 1
        failed = result.failed_stage
        assert failed.error == "boom"
        assert isinstance(failed.exception, RuntimeError)
        assert "✗ broken" in result.summary()
        assert "error: boom" in result.summary()

    def test_previous_results_are_visible(self, config):
        ctx = StageContext()
        Pipeline([Succeeds(config), Skips(config)], config=config).run(ctx)
        assert ctx.get_result("ok").summary == "all good"
        assert ctx.get_result("missing") is None

    def test_to_dict(self, config):
        result = Pipeline([Succeeds(config)], name="demo", config=config).run(StageContext())
        d = result.to_dict()
        assert d["name"] == "demo"
        assert d["stages"][0]["status"] == "completed"

    def test_tracing_flag_still_runs(self):
        config = tiny_config()
        config.tracing_enabled = True
        result = Pipeline([Succeeds(config)], config=config).run(StageContext())
        assert result.successful


class TestTrainingStages:
    def test_hierarchical_pipeline(self, pretrain_data, csrl_data):
        config = tiny_config(max_steps=2, max_epochs=1)
        ctx = StageContext(data=pretrain_data, train=csrl_data, dev=csrl_data[:2])

        result = Pipeline.hierarchical(config).run(ctx)

        assert result.successful, result.summary()
        assert [r.stage_name for r in result.stage_results] == ["clm", "sc", "pa", "csrl"]
        assert result.checkpoint.stages == ["clm", "sc", "pa", "csrl"]
        clm = result.stage_results[0]
        assert set(clm.losses) == {"tlm", "hpsi", "total"}
        assert set(clm.output["digests"]) == {"backbone", "sc", "pa", "heads"}
        assert result.stage_results[-1].scores["best_epoch"] == 1

    def test_disabled_stage_is_skipped_but_recorded(self, pretrain_data):
        config = tiny_config(max_steps=2, objectives=["tlm", "hpsi", "sai"])
        ctx = StageContext(data=pretrain_data)

        stages = [ClmStage(config), ScStage(config), PaStage(config)]
        result = Pipeline(stages, config=config).run(ctx)

        statuses = [r.status for r in result.stage_results]
        assert statuses == [StageStatus.COMPLETED, StageStatus.SKIPPED, StageStatus.COMPLETED]
        assert result.checkpoint.stages == ["clm", "sc", "pa"]
        clm_digests = result.stage_results[0].output["digests"]
        assert result.checkpoint.digests["sc"] == clm_digests["sc"]

    def test_out_of_order_stage_fails(self, config, pretrain_data):
        result = Pipeline([PaStage(config)], config=config).run(StageContext(data=pretrain_data))
        assert isinstance(result.failed_stage.exception, StageOrderError)

    def test_end2end_pipeline(self, pretrain_data):
        config = tiny_config(max_steps=2, max_epochs=1)
        ctx = StageContext(data=pretrain_data, train=toy_csrl(4))

        result = Pipeline.end2end(config).run(ctx)

        assert result.successful, result.summary()
        assert result.checkpoint.stages == ["clm", "sc", "pa", "csrl"]

    def test_resumes_from_context_checkpoint(self, config, pretrain_data):
        ctx = StageContext(data=pretrain_data)
        Pipeline([ClmStage(config)], config=config).run(ctx)
        first = ctx.checkpoint

        result = Pipeline([ScStage(config)], config=config).run(ctx)

        assert result.successful
        assert ctx.checkpoint is not first
        assert ctx.checkpoint.digests["backbone"] == first.digests["backbone"]

    @pytest.mark.parametrize("freeze", [False, True])
    def test_csrl_stage_summary(self, pretrain_data, freeze):
        config = tiny_config(max_steps=2, max_epochs=1, freeze_lm=freeze)
        ctx = StageContext(data=pretrain_data, train=toy_csrl(4))

        result = Pipeline([CsrlStage(config)], config=config).run(ctx)

        [stage] = result.stage_results
        assert stage.scores is None
        assert ("language model frozen" in stage.summary) == freeze

"""Tests for staged pre-training and CSRL training."""

import json

import numpy as np
import pytest

from crosstalk.errors import CheckpointMismatchError, CorpusError, StageOrderError
from crosstalk.models import LabelInventory, StageName
from crosstalk.training import (
    FROZEN_BLOCKS,
    MetricsLog,
    PretrainData,
    Trainer,
    build_vocabulary,
    evaluate,
    pretrain,
    train_csrl,
)
from tests.factories import tiny_config, toy_csrl


def _trainer(config, data, inventory=None):
    return Trainer.fresh(config, build_vocabulary(data, toy_csrl()), inventory)


def _changed(before, after):
    return {name for name in before if before[name] != after[name]}


class TestFreezing:
    def test_sc_stage_leaves_backbone_untouched(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=2)
        before = trainer.digests()

        trainer.pretrain("sc", pretrain_data, steps=10)

        changed = _changed(before, trainer.digests())
        assert "backbone" not in changed
        assert {"sc", "heads"} <= changed

    def test_pa_stage_leaves_backbone_and_sc_untouched(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=2)
        trainer.pretrain("sc", pretrain_data, steps=2)
        before = trainer.digests()

        trainer.pretrain("pa", pretrain_data, steps=10)

        changed = _changed(before, trainer.digests())
        assert not changed & set(FROZEN_BLOCKS[StageName.PA])
        assert "pa" in changed

    def test_csrl_with_frozen_language_model(self, pretrain_data, csrl_data):
        config = tiny_config(freeze_lm=True, max_epochs=2)
        trainer = _trainer(config, pretrain_data)
        before = trainer.digests()

        trainer.train_csrl(csrl_data, dev=csrl_data[:4])

        changed = _changed(before, trainer.digests())
        assert "backbone" not in changed
        assert {"sc", "pa"} <= changed

    def test_csrl_trains_language_model_by_default(self, config, pretrain_data, csrl_data):
        trainer = _trainer(config, pretrain_data)
        before = trainer.digests()
        trainer.train_csrl(csrl_data)
        assert "backbone" in _changed(before, trainer.digests())


class TestStageOrder:
    def test_sc_needs_clm(self, config, pretrain_data):
        with pytest.raises(StageOrderError, match="clm"):
            _trainer(config, pretrain_data).pretrain("sc", pretrain_data, steps=1)

    def test_pa_needs_sc(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=1)
        with pytest.raises(StageOrderError, match="sc"):
            trainer.pretrain("pa", pretrain_data, steps=1)

    def test_stages_travel_with_checkpoint(self, config, pretrain_data):
        checkpoint = pretrain("clm", pretrain_data, config, steps=1)
        assert checkpoint.stages == ["clm"]
        checkpoint = pretrain("sc", pretrain_data, config, init=checkpoint, steps=1)
        assert checkpoint.stages == ["clm", "sc"]

    def test_end2end_completes_every_pretraining_stage(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        history = trainer.pretrain_end2end(pretrain_data, steps=3)

        assert trainer.stages == ["clm", "sc", "pa"]
        assert set(history[-1]) == {"tlm", "hpsi", "spi", "uor", "sai", "total"}

    def test_csrl_is_not_a_pretraining_stage(self, config, pretrain_data):
        with pytest.raises(ValueError):
            _trainer(config, pretrain_data).pretrain("csrl", pretrain_data)

    @pytest.mark.parametrize(
        "done,stage",
        [
            (["clm", "sc"], "clm"),
            (["clm", "sc", "pa"], "clm"),
            (["clm", "sc", "pa"], "sc"),
            (["clm", "sc", "pa", "csrl"], "pa"),
        ],
    )
    def test_earlier_stage_on_later_checkpoint(self, config, pretrain_data, done, stage):
        trainer = _trainer(config, pretrain_data)
        for name in done:
            if name == "csrl":
                trainer.train_csrl(toy_csrl(4))
            else:
                trainer.pretrain(name, pretrain_data, steps=1)
        before = trainer.digests()

        with pytest.raises(StageOrderError, match="already completed"):
            trainer.pretrain(stage, pretrain_data, steps=1)

        assert trainer.digests() == before
        assert trainer.stages == done

    def test_rerunning_the_latest_stage_is_allowed(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=1)
        trainer.pretrain("clm", pretrain_data, steps=1)
        assert trainer.stages == ["clm"]

    def test_end2end_after_csrl(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        trainer.train_csrl(toy_csrl(4))
        with pytest.raises(StageOrderError, match="csrl"):
            trainer.pretrain_end2end(pretrain_data, steps=1)


class TestDisabledObjectives:
    def test_stage_without_objectives_changes_nothing(self, pretrain_data):
        config = tiny_config(objectives=["tlm", "hpsi", "sai"])
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=1)
        before = trainer.digests()

        history = trainer.pretrain("sc", pretrain_data, steps=5)

        assert history == []
        assert trainer.digests() == before
        assert trainer.stages == ["clm", "sc"]

    def test_sc_skipped_without_structure_encoder(self, pretrain_data):
        config = tiny_config(model={"use_sc_encoder": False})
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=1)
        assert trainer.pretrain("sc", PretrainData(), steps=5) == []

    def test_single_objective_stage(self, pretrain_data):
        config = tiny_config(objectives=["tlm"])
        history = _trainer(config, pretrain_data).pretrain("clm", pretrain_data, steps=3)
        assert all(set(h) == {"tlm", "total"} for h in history)


class TestDataErrors:
    def test_missing_parallel_pairs(self, config, pretrain_data):
        with pytest.raises(CorpusError, match="parallel"):
            _trainer(config, pretrain_data).pretrain("clm", PretrainData(), steps=1)

    def test_missing_dialogues(self, config, pretrain_data):
        trainer = _trainer(config, pretrain_data)
        trainer.pretrain("clm", pretrain_data, steps=1)
        with pytest.raises(CorpusError, match="dialogue"):
            trainer.pretrain("sc", PretrainData(pairs=pretrain_data.pairs), steps=1)

    def test_csrl_without_frames(self, config, pretrain_data):
        with pytest.raises(CorpusError, match="no frames"):
            _trainer(config, pretrain_data).train_csrl([])

    def test_csrl_with_unknown_role(self, config, pretrain_data, csrl_data):
        trainer = _trainer(config, pretrain_data, LabelInventory(["ARG0"]))
        with pytest.raises(CheckpointMismatchError, match="ARG1"):
            trainer.train_csrl(csrl_data)

    def test_resume_with_other_inventory(self, config, pretrain_data):
        checkpoint = pretrain("clm", pretrain_data, config, steps=1)
        with pytest.raises(CheckpointMismatchError):
            Trainer.from_checkpoint(checkpoint, config, LabelInventory(["ARG0"]))


class TestCsrlTraining:
    def test_restores_best_dev_epoch(self, pretrain_data, csrl_data, inventory):
        config = tiny_config(max_epochs=4, patience=2)
        trainer = _trainer(config, pretrain_data)
        dev = csrl_data[:6]

        summary = trainer.train_csrl(csrl_data, dev)

        assert 1 <= summary["best_epoch"] <= summary["epochs"] <= 4
        report = evaluate(
            trainer.model, dev, trainer.vocab, inventory, trainer.model.config, batch_size=4
        )
        assert report.f1_all == pytest.approx(summary["best_f1_all"])
        assert trainer.stages == ["csrl"]

    def test_step_cap(self, pretrain_data, csrl_data):
        config = tiny_config(max_epochs=10, max_steps=3, batch_size=4)
        summary = _trainer(config, pretrain_data).train_csrl(csrl_data)
        assert summary["steps"] == 3
        assert summary["epochs"] == 1

    def test_module_function_returns_checkpoint(self, config, csrl_data):
        checkpoint = train_csrl(csrl_data, config)
        assert checkpoint.stages == ["csrl"]
        assert checkpoint.metrics["csrl"]["steps"] > 0


class TestMetrics:
    def test_records_every_log_interval(self, tmp_path, pretrain_data):
        config = tiny_config(log_every=5)
        metrics = MetricsLog(tmp_path / "metrics.jsonl")
        trainer = Trainer.fresh(config, build_vocabulary(pretrain_data), metrics=metrics)

        trainer.pretrain("clm", pretrain_data, steps=10)

        assert [r["step"] for r in metrics.records] == [0, 5, 9]
        lines = (tmp_path / "metrics.jsonl").read_text(encoding="utf-8").splitlines()
        first = json.loads(lines[0])
        assert first["stage"] == "clm"
        assert set(first["losses"]) == {"tlm", "hpsi", "total"}
        assert first["lr"] == first["lm_lr"] == 0.0

    def test_language_model_curve_applies_to_csrl_only(self, pretrain_data, csrl_data):
        config = tiny_config(log_every=1, lm_max_lr=1e-4, lm_min_lr=1e-5)
        trainer = _trainer(config, pretrain_data)

        trainer.pretrain("clm", pretrain_data, steps=5)
        trainer.train_csrl(csrl_data)

        clm = [r for r in trainer.metrics.records if r["stage"] == "clm"]
        csrl = [r for r in trainer.metrics.records if r["stage"] == "csrl"]
        assert all(r["lm_lr"] == r["lr"] for r in clm)
        assert all(r["lm_lr"] <= r["lr"] for r in csrl)
        assert any(r["lm_lr"] < r["lr"] for r in csrl)

    def test_dev_scores_are_logged(self, pretrain_data, csrl_data):
        config = tiny_config(max_epochs=1)
        trainer = _trainer(config, pretrain_data)
        trainer.train_csrl(csrl_data, csrl_data[:2])
        dev = [r["dev"] for r in trainer.metrics.records if "dev" in r]
        assert set(dev[0]) == {"f1_all", "f1_cross", "f1_intra"}


def test_same_seed_same_parameters(config, pretrain_data):
    first = _trainer(config, pretrain_data)
    first.pretrain("clm", pretrain_data, steps=3)
    second = _trainer(config, pretrain_data)
    second.pretrain("clm", pretrain_data, steps=3)
    assert first.digests() == second.digests()


@pytest.mark.slow
@pytest.mark.parametrize("stage", ["clm", "sc", "pa"])
def test_pretraining_loss_decreases(pretrain_data, stage):
    earlier = {"clm": [], "sc": ["clm"], "pa": ["clm", "sc"]}[stage]
    drops = []
    for seed in range(5):
        config = tiny_config(seed=seed)
        trainer = _trainer(config, pretrain_data)
        for name in earlier:
            trainer.pretrain(name, pretrain_data, steps=1)
        history = trainer.pretrain(stage, pretrain_data, steps=200)
        assert len(history) == 200
        totals = [h["total"] for h in history]
        drops.append(np.mean(totals[:5]) - np.mean(totals[-5:]))
    assert np.mean(drops) > 0


@pytest.mark.slow
def test_csrl_overfits_small_corpus(pretrain_data, csrl_data):
    config = tiny_config(
        model=dict(
            backbone_hidden=32,
            backbone_heads=4,
            hidden_size=64,
            heads=4,
            ffn_size=128,
            word_layers=2,
            turn_dim=16,
            speaker_dim=16,
            predicate_dim=16,
        ),
        batch_size=8,
        max_epochs=300,
        max_steps=100_000,
        patience=50,
    )
    trainer = _trainer(config, pretrain_data)

    summary = trainer.train_csrl(csrl_data, csrl_data)

    assert summary["best_f1_all"] >= 0.95

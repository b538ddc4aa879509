"""
Hierarchical pre-training and CSRL training.

Pre-training runs in three stages over one model: clm trains the backbone
on TLM + HPSI, sc trains the SC-Encoder on SPI + UOR with the backbone
frozen, and pa trains the PA-Encoder on SAI with the backbone and SC-Encoder
frozen. CSRL training then fine-tunes the whole stack, optionally keeping
the backbone frozen.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.optim import AdamW

from crosstalk.config import CrosstalkConfig
from crosstalk.errors import CheckpointMismatchError, CorpusError, StageOrderError
from crosstalk.model.batching import IGNORE_INDEX
from crosstalk.model.csrl import CsrlModel
from crosstalk.model.vocab import Vocabulary
from crosstalk.models import AnnotatedDialogue, LabelInventory, ParallelPair, StageName
from crosstalk.objectives.dialogue import spi_corrupt, uor_shuffle
from crosstalk.objectives.hpsi import HpsiSampler
from crosstalk.objectives.losses import ObjectiveId, objective_loss
from crosstalk.objectives.sai import sai_build
from crosstalk.objectives.sampling import LanguageBalancedSampler, balanced_batch, derive_rng
from crosstalk.objectives.tlm import tlm_corrupt
from crosstalk.training.batches import (
    frame_batch,
    hpsi_batch,
    sai_batch,
    spi_batch,
    tlm_batch,
    uor_batch,
)
from crosstalk.training.checkpoint import Checkpoint, block_digests
from crosstalk.training.inference import evaluate
from crosstalk.training.schedule import lr_at

logger = logging.getLogger(__name__)

STAGE_OBJECTIVES: Dict[StageName, Tuple[ObjectiveId, ...]] = {
    StageName.CLM: (ObjectiveId.TLM, ObjectiveId.HPSI),
    StageName.SC: (ObjectiveId.SPI, ObjectiveId.UOR),
    StageName.PA: (ObjectiveId.SAI,),
}

FROZEN_BLOCKS: Dict[StageName, Tuple[str, ...]] = {
    StageName.CLM: (),
    StageName.SC: ("backbone",),
    StageName.PA: ("backbone", "sc"),
}

PREREQUISITE: Dict[StageName, StageName] = {
    StageName.SC: StageName.CLM,
    StageName.PA: StageName.SC,
}

STAGE_ORDER: Tuple[StageName, ...] = (StageName.CLM, StageName.SC, StageName.PA, StageName.CSRL)

# Stream ids for derive_rng, one per training run kind
STREAMS = {"clm": 1, "sc": 2, "pa": 3, "end2end": 4, "csrl": 5}

Loss = Optional[torch.Tensor]


@dataclass
class PretrainData:
    """Corpora consumed by the pre-training stages."""

    pairs: List[ParallelPair] = field(default_factory=list)
    dialogues: List[AnnotatedDialogue] = field(default_factory=list)
    srl: List[AnnotatedDialogue] = field(default_factory=list)


def corpus_sentences(
    pairs: Iterable[ParallelPair] = (),
    *datasets: Iterable[AnnotatedDialogue],
) -> Iterator[Tuple[str, ...]]:
    for pair in pairs:
        yield pair.source
        yield pair.target
    for dataset in datasets:
        for item in dataset:
            for utterance in item.dialogue.utterances:
                yield utterance.tokens


def build_vocabulary(
    data: PretrainData,
    *extra: Iterable[AnnotatedDialogue],
) -> Vocabulary:
    """Vocabulary over every sentence the run will see."""
    return Vocabulary.build(corpus_sentences(data.pairs, data.dialogues, data.srl, *extra))


class MetricsLog:
    """JSON-lines training metrics, appended to ``path`` when one is set."""

    def __init__(self, path: Optional[str | Path] = None) -> None:
        self.path = Path(path) if path else None
        self.records: List[Dict[str, Any]] = []

    def record(
        self,
        stage: str,
        step: int,
        losses: Dict[str, float],
        lr: float,
        lm_lr: float,
        dev: Optional[Dict[str, float]] = None,
    ) -> Dict[str, Any]:
        entry: Dict[str, Any] = {
            "time": datetime.now().isoformat(),
            "stage": stage,
            "step": step,
            "losses": {k: round(v, 6) for k, v in losses.items()},
            "lr": lr,
            "lm_lr": lm_lr,
        }
        if dev is not None:
            entry["dev"] = dev
        self.records.append(entry)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry) + "\n")
        return entry


def _has_targets(targets: Optional[torch.Tensor]) -> bool:
    return targets is not None and bool((targets != IGNORE_INDEX).any())


class Trainer:
    """
    Owns one CsrlModel and moves it through the stage sequence.

    ``stages`` lists the stages completed so far; it travels with every
    checkpoint and gates the order of later stages.
    """

    def __init__(
        self,
        model: CsrlModel,
        vocab: Vocabulary,
        inventory: LabelInventory,
        config: CrosstalkConfig,
        stages: Sequence[str] = (),
        metrics: Optional[MetricsLog] = None,
    ) -> None:
        self.model = model.to(config.device)
        self.vocab = vocab
        self.inventory = inventory
        self.config = config
        self.stages: List[str] = list(stages)
        self.metrics = metrics or MetricsLog(config.metrics_file)
        self.history: Dict[str, Any] = {}

    @classmethod
    def fresh(
        cls,
        config: CrosstalkConfig,
        vocab: Vocabulary,
        inventory: Optional[LabelInventory] = None,
        metrics: Optional[MetricsLog] = None,
    ) -> "Trainer":
        """A trainer around a randomly initialized model."""
        inventory = inventory or LabelInventory(config.roles)
        torch.manual_seed(config.train.seed)
        model = CsrlModel(config.model, len(vocab), len(inventory))
        return cls(model, vocab, inventory, config, metrics=metrics)

    @classmethod
    def from_checkpoint(
        cls,
        checkpoint: Checkpoint,
        config: CrosstalkConfig,
        inventory: Optional[LabelInventory] = None,
        metrics: Optional[MetricsLog] = None,
    ) -> "Trainer":
        """
        A trainer resuming from ``checkpoint``.

        The checkpoint's model settings replace the configured ones.

        Raises:
            CheckpointMismatchError: When ``inventory`` differs from the checkpoint's
        """
        if inventory is not None:
            checkpoint.check_inventory(inventory)
        if dataclasses.asdict(config.model) != checkpoint.model_config:
            logger.info("Using the model settings stored in the checkpoint")
        config = dataclasses.replace(config, model=checkpoint.config)
        return cls(
            checkpoint.build_model(config.device),
            checkpoint.vocabulary,
            checkpoint.inventory,
            config,
            stages=checkpoint.stages,
            metrics=metrics,
        )

    def checkpoint(self) -> Checkpoint:
        return Checkpoint.from_model(
            self.model, self.vocab, self.inventory, self.stages, metrics=self.history
        )

    def digests(self) -> Dict[str, str]:
        return block_digests(self.model)

    def freeze(self, frozen: Iterable[str]) -> None:
        """Stop gradients into the named blocks and keep them in eval mode."""
        frozen = set(frozen)
        self.model.train()
        for name, block in self.model.blocks().items():
            trainable = name not in frozen
            for parameter in block.parameters():
                parameter.requires_grad_(trainable)
            if not trainable:
                block.eval()

    def enabled_objectives(self, stage: StageName) -> List[ObjectiveId]:
        objectives = [o for o in STAGE_OBJECTIVES[stage] if o.value in self.config.train.objectives]
        if stage == StageName.SC and not self.model.config.use_sc_encoder:
            return []
        return objectives

    def check_order(self, stage: StageName | str) -> None:
        """
        Raises:
            StageOrderError: When the prerequisite stage has not completed, or
                when the checkpoint already went through a later stage
        """
        stage = StageName(stage)
        done = ", ".join(self.stages) or "none"
        required = PREREQUISITE.get(stage)
        if required is not None and required.value not in self.stages:
            raise StageOrderError(
                f"Stage {stage.value} needs a checkpoint that completed stage "
                f"{required.value} (completed: {done})"
            )
        later = STAGE_ORDER[STAGE_ORDER.index(stage) + 1 :]
        ahead = [s.value for s in later if s.value in self.stages]
        if ahead:
            raise StageOrderError(
                f"Stage {stage.value} cannot run on a checkpoint that already completed "
                f"{', '.join(ahead)} (completed: {done})"
            )

    def pretrain(
        self,
        stage: StageName | str,
        data: PretrainData,
        steps: Optional[int] = None,
    ) -> List[Dict[str, float]]:
        """
        Run one pre-training stage.

        Args:
            stage: clm, sc or pa
            data: Corpora for the stage's objectives
            steps: Optimization steps (defaults to ``max_steps``)

        Returns:
            Per-step losses, each with the objective losses and their ``total``

        Raises:
            StageOrderError: When the previous stage has not completed
            CorpusError: When an enabled objective has no data
        """
        stage = StageName(stage)
        if stage == StageName.CSRL:
            raise ValueError("CSRL is trained with train_csrl")
        self.check_order(stage)
        objectives = self.enabled_objectives(stage)
        history: List[Dict[str, float]] = []
        if objectives:
            history = self._optimize(
                stage.value, objectives, data, FROZEN_BLOCKS[stage], steps
            )
        else:
            logger.info(f"Stage {stage.value}: no enabled objectives, parameters unchanged")
        self._complete(stage)
        return history

    def pretrain_end2end(
        self,
        data: PretrainData,
        steps: Optional[int] = None,
    ) -> List[Dict[str, float]]:
        """Optimize every enabled objective jointly with nothing frozen."""
        if StageName.CSRL.value in self.stages:
            raise StageOrderError(
                "Joint pre-training cannot run on a checkpoint that already completed csrl"
            )
        objectives = [
            o
            for stage in (StageName.CLM, StageName.SC, StageName.PA)
            for o in self.enabled_objectives(stage)
        ]
        history: List[Dict[str, float]] = []
        if objectives:
            history = self._optimize("end2end", objectives, data, (), steps)
        for stage in (StageName.CLM, StageName.SC, StageName.PA):
            self._complete(stage)
        return history

    def train_csrl(
        self,
        train: Sequence[AnnotatedDialogue],
        dev: Optional[Sequence[AnnotatedDialogue]] = None,
    ) -> Dict[str, Any]:
        """
        Minimize token-level cross-entropy over tags.

        Runs up to ``max_epochs`` epochs capped at ``max_steps`` steps. With
        a dev set, training stops after ``patience`` epochs without a better
        dev F1_all and the best epoch's parameters are restored.

        Raises:
            CorpusError: When ``train`` holds no frames
            CheckpointMismatchError: When a gold role is outside the model's inventory
        """
        cfg = self.config.train
        items = [(item.dialogue, frame) for item in train for frame in item.frames]
        if not items:
            raise CorpusError("CSRL training data holds no frames")
        unknown = sorted({r for _, f in items for r in f.roles if r not in self.inventory})
        if unknown:
            raise CheckpointMismatchError(
                f"Roles {unknown} are not in the model's inventory {list(self.inventory.roles)}"
            )

        frozen = ("backbone",) if cfg.freeze_lm else ()
        steps_per_epoch = math.ceil(len(items) / cfg.batch_size)
        total = min(cfg.max_steps, cfg.max_epochs * steps_per_epoch)
        rng = derive_rng(cfg.seed, STREAMS["csrl"])
        torch.manual_seed(cfg.seed)
        self.freeze(frozen)
        optimizer = self._optimizer()
        logger.info(
            f"CSRL training: {len(items)} frames, {total} steps"
            + (", language model frozen" if cfg.freeze_lm else "")
        )

        best_f1, best_epoch, stale = -1.0, 0, 0
        best_state: Optional[Dict[str, torch.Tensor]] = None
        step, epoch = 0, 0
        lr = lm_lr = 0.0
        while epoch < cfg.max_epochs and step < total:
            epoch += 1
            order = rng.permutation(len(items))
            losses: List[float] = []
            for begin in range(0, len(items), cfg.batch_size):
                if step >= total:
                    break
                chunk = [items[int(i)] for i in order[begin : begin + cfg.batch_size]]
                batch = frame_batch(chunk, self.vocab, self.model.config, self.inventory)
                batch = batch.to(self.model.device)
                lr, lm_lr = self._set_lr(optimizer, step, total, lm_curve=True)
                loss = objective_loss(ObjectiveId.CSRL, self.model.tag_logits(batch), batch.tags)
                self._update(optimizer, loss)
                losses.append(float(loss.detach()))
                step += 1
                if step % cfg.log_every == 0:
                    self.metrics.record("csrl", step, {"csrl": losses[-1]}, lr, lm_lr)

            epoch_loss = {"csrl": sum(losses) / len(losses)} if losses else {}
            if not dev:
                logger.info(f"Epoch {epoch}: loss {epoch_loss.get('csrl', float('nan')):.4f}")
                continue

            report = evaluate(
                self.model, dev, self.vocab, self.inventory, self.model.config, cfg.batch_size
            )
            self.freeze(frozen)
            scores = {"f1_all": report.f1_all, "f1_cross": report.f1_cross,
                      "f1_intra": report.f1_intra}
            self.metrics.record("csrl", step, epoch_loss, lr, lm_lr, dev=scores)
            logger.info(f"Epoch {epoch}: dev F1_all {report.f1_all:.4f}")
            if report.f1_all > best_f1:
                best_f1, best_epoch, stale = report.f1_all, epoch, 0
                best_state = copy.deepcopy(self.model.state_dict())
            else:
                stale += 1
                if stale >= cfg.patience:
                    logger.info(f"Early stop after epoch {epoch} (best epoch {best_epoch})")
                    break

        if best_state is not None:
            self.model.load_state_dict(best_state)
            logger.info(f"Restored parameters of epoch {best_epoch} (dev F1_all {best_f1:.4f})")
        self._complete(StageName.CSRL)
        summary: Dict[str, Any] = {"epochs": epoch, "steps": step}
        if best_state is not None:
            summary.update({"best_epoch": best_epoch, "best_f1_all": best_f1})
        self.history["csrl"] = summary
        return summary

    def _complete(self, stage: StageName) -> None:
        if stage.value not in self.stages:
            self.stages.append(stage.value)

    def _optimizer(self) -> AdamW:
        cfg = self.config.train
        lm = [p for p in self.model.backbone.parameters() if p.requires_grad]
        rest = [
            p
            for name, block in self.model.blocks().items()
            if name != "backbone"
            for p in block.parameters()
            if p.requires_grad
        ]
        groups = []
        if lm:
            groups.append({"params": lm, "group": "lm"})
        if rest:
            groups.append({"params": rest, "group": "main"})
        if not groups:
            raise ValueError("Every block is frozen; nothing to train")
        return AdamW(
            groups,
            lr=cfg.max_lr,
            betas=(cfg.beta1, cfg.beta2),
            weight_decay=cfg.weight_decay,
        )

    def _set_lr(
        self, optimizer: AdamW, step: int, total: int, lm_curve: bool
    ) -> Tuple[float, float]:
        """Set group rates; the backbone follows the LM curve only when ``lm_curve``."""
        lr = lr_at(step, total, self.config.train)
        lm_lr = lr_at(step, total, self.config.train, lm=True) if lm_curve else lr
        for group in optimizer.param_groups:
            group["lr"] = lm_lr if group["group"] == "lm" else lr
        return lr, lm_lr

    def _update(self, optimizer: AdamW, loss: torch.Tensor) -> None:
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        parameters = [p for group in optimizer.param_groups for p in group["params"]]
        torch.nn.utils.clip_grad_norm_(parameters, self.config.train.max_grad_norm)
        optimizer.step()

    def _optimize(
        self,
        label: str,
        objectives: Sequence[ObjectiveId],
        data: PretrainData,
        frozen: Sequence[str],
        steps: Optional[int],
    ) -> List[Dict[str, float]]:
        cfg = self.config.train
        total = steps if steps is not None else cfg.max_steps
        if total < 1:
            raise ValueError(f"steps must be >= 1, got {total}")
        rng = derive_rng(cfg.seed, STREAMS[label])
        torch.manual_seed(cfg.seed)
        builders = {o: self._builder(o, data) for o in objectives}
        self.freeze(frozen)
        optimizer = self._optimizer()
        names = ", ".join(o.value for o in objectives)
        frozen_names = ", ".join(frozen) or "nothing"
        logger.info(f"Stage {label}: {total} steps on {names}, frozen: {frozen_names}")

        history: List[Dict[str, float]] = []
        for step in range(total):
            lr, lm_lr = self._set_lr(optimizer, step, total, lm_curve=False)
            parts: Dict[str, torch.Tensor] = {}
            for objective, build in builders.items():
                loss = build(rng)
                if loss is not None:
                    parts[objective.value] = loss
            if not parts:
                logger.debug(f"Stage {label} step {step}: batch without targets")
                continue
            total_loss = torch.stack(list(parts.values())).sum()
            self._update(optimizer, total_loss)
            values = {k: float(v.detach()) for k, v in parts.items()}
            values["total"] = float(total_loss.detach())
            history.append(values)
            if step % cfg.log_every == 0 or step == total - 1:
                self.metrics.record(label, step, values, lr, lm_lr)
                logger.info(f"Stage {label} step {step}: loss {values['total']:.4f}")

        self.history[label] = {
            "steps": total,
            "final_loss": history[-1]["total"] if history else None,
        }
        return history

    def _builder(
        self,
        objective: ObjectiveId,
        data: PretrainData,
    ) -> Callable[[np.random.Generator], Loss]:
        """Closure drawing one batch for ``objective`` and returning its loss."""
        cfg = self.config.train
        model_cfg = self.model.config
        size = cfg.batch_size
        device = self.model.device

        if objective in (ObjectiveId.TLM, ObjectiveId.HPSI):
            if not data.pairs:
                raise CorpusError(f"{objective.value} needs parallel sentence pairs")
            forward = data.pairs
            backward = [p.swapped() for p in data.pairs]

            if objective == ObjectiveId.TLM:

                def tlm(rng: np.random.Generator) -> Loss:
                    pairs = balanced_batch(forward, backward, size, rng)
                    examples = [tlm_corrupt(p, self.vocab, cfg.mask_rate, rng) for p in pairs]
                    batch = tlm_batch(examples, self.vocab, model_cfg.max_len).to(device)
                    if not _has_targets(batch.targets):
                        return None
                    return objective_loss(objective, self.model.tlm_logits(batch), batch.targets)

                return tlm

            samplers = (HpsiSampler(forward), HpsiSampler(backward))

            def hpsi(rng: np.random.Generator) -> Loss:
                chosen = balanced_batch([samplers[0]], [samplers[1]], size, rng)
                examples = [sampler.sample(rng) for sampler in chosen]
                batch = hpsi_batch(examples, self.vocab, model_cfg.max_len).to(device)
                return objective_loss(objective, self.model.hpsi_logits(batch), batch.labels)

            return hpsi

        if objective in (ObjectiveId.SPI, ObjectiveId.UOR):
            if not data.dialogues:
                raise CorpusError(f"{objective.value} needs dialogue data")
            dialogues = LanguageBalancedSampler(data.dialogues, lambda d: d.dialogue.language)

            def dialogue_loss(rng: np.random.Generator) -> Loss:
                drawn = dialogues.batch(size, rng)
                if objective == ObjectiveId.SPI:
                    spi = [spi_corrupt(d.dialogue, cfg.spi_ratio, rng) for d in drawn]
                    batch = spi_batch(spi, self.vocab, model_cfg).to(device)
                    logits = self.model.spi_logits(batch)
                else:
                    uor = [uor_shuffle(d.dialogue, cfg.uor_ratio, rng) for d in drawn]
                    batch = uor_batch(uor, self.vocab, model_cfg).to(device)
                    logits = self.model.uor_logits(batch)
                if not _has_targets(batch.utterance_targets):
                    return None
                return objective_loss(objective, logits, batch.utterance_targets)

            return dialogue_loss

        if objective == ObjectiveId.SAI:
            if not data.srl:
                raise CorpusError("sai needs SRL data")
            samples = LanguageBalancedSampler(data.srl, lambda s: s.dialogue.language)

            def sai(rng: np.random.Generator) -> Loss:
                examples = [sai_build(s, self.inventory) for s in samples.batch(size, rng)]
                batch = sai_batch(examples, self.vocab, model_cfg).to(device)
                return objective_loss(objective, self.model.sai_logits(batch), batch.tags)

            return sai

        raise ValueError(f"{objective.value} is not a pre-training objective")


def _trainer(
    config: CrosstalkConfig,
    init: Optional[Checkpoint],
    data: PretrainData,
    extra: Sequence[Sequence[AnnotatedDialogue]] = (),
    inventory: Optional[LabelInventory] = None,
    metrics: Optional[MetricsLog] = None,
) -> Trainer:
    if init is not None:
        return Trainer.from_checkpoint(init, config, inventory, metrics)
    return Trainer.fresh(config, build_vocabulary(data, *extra), inventory, metrics)


def pretrain(
    stage: StageName | str,
    data: PretrainData,
    config: CrosstalkConfig,
    init: Optional[Checkpoint] = None,
    steps: Optional[int] = None,
    metrics: Optional[MetricsLog] = None,
) -> Checkpoint:
    """
    Run one pre-training stage and return the resulting checkpoint.

    Without ``init`` a fresh model is built, which only stage clm accepts.
    """
    trainer = _trainer(config, init, data, metrics=metrics)
    trainer.pretrain(stage, data, steps)
    return trainer.checkpoint()


def pretrain_end2end(
    data: PretrainData,
    config: CrosstalkConfig,
    init: Optional[Checkpoint] = None,
    steps: Optional[int] = None,
    metrics: Optional[MetricsLog] = None,
) -> Checkpoint:
    trainer = _trainer(config, init, data, metrics=metrics)
    trainer.pretrain_end2end(data, steps)
    return trainer.checkpoint()


def train_csrl(
    train: Sequence[AnnotatedDialogue],
    config: CrosstalkConfig,
    init: Optional[Checkpoint] = None,
    dev: Optional[Sequence[AnnotatedDialogue]] = None,
    inventory: Optional[LabelInventory] = None,
    metrics: Optional[MetricsLog] = None,
) -> Checkpoint:
    """Train CSRL from ``init`` (or from scratch) and return the final checkpoint."""
    trainer = _trainer(
        config, init, PretrainData(), extra=[train, dev or []], inventory=inventory,
        metrics=metrics,
    )
    trainer.train_csrl(train, dev)
    return trainer.checkpoint()

"""
Command-line interface for crosstalk.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, NoReturn, Optional

import click

from crosstalk import __version__
from crosstalk.config import CrosstalkConfig, configure, parse_override
from crosstalk.errors import (
    CheckpointMismatchError,
    ConfigError,
    CorpusError,
    CrosstalkError,
    StageOrderError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_STAGE_ORDER = 3
EXIT_CHECKPOINT = 4

OUTPUT = click.Choice(["text", "json"])


def exit_code(error: BaseException) -> int:
    """Map an exception onto the documented exit codes."""
    if isinstance(error, StageOrderError):
        return EXIT_STAGE_ORDER
    if isinstance(error, CheckpointMismatchError):
        return EXIT_CHECKPOINT
    if isinstance(error, ConfigError):
        return EXIT_USAGE
    if isinstance(error, (CorpusError, OSError)):
        return EXIT_DATA
    return EXIT_USAGE


def fail(error: BaseException) -> NoReturn:
    click.echo(f"Error: {error}", err=True)
    sys.exit(exit_code(error))


def handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Turn crosstalk and file errors into a message plus exit code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except (CrosstalkError, OSError) as e:
            fail(e)

    return wrapper


def emit(payload: Dict[str, Any], text: str, output: str) -> None:
    if output == "json":
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(text)


def _checkpoint_path(cfg: CrosstalkConfig, out: Optional[str], name: str) -> Path:
    return Path(out) if out else Path(cfg.output_dir) / f"{name}.pt"


def _load_checkpoint(path: Optional[str]):
    if path is None:
        return None
    from crosstalk.training import Checkpoint

    return Checkpoint.load(path)


def _run_stages(pipeline, ctx):
    """Run a pipeline and exit with the failed stage's code on failure."""
    result = pipeline.run(ctx)
    failed = result.failed_stage
    if failed is not None:
        click.echo(result.summary(), err=True)
        fail(failed.exception or CrosstalkError(failed.error or "stage failed"))
    return result


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_file", type=click.Path(), help="Flat YAML config file")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Config override")
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.pass_context
def main(ctx: click.Context, config_file: Optional[str], overrides: tuple, debug: bool) -> None:
    """crosstalk - zero-shot cross-lingual conversational SRL."""
    try:
        values = dict(parse_override(o) for o in overrides)
        cfg = configure(
            config_file=config_file,
            log_level="DEBUG" if debug else None,
            **values,
        )
    except ConfigError as e:
        fail(e)
    except OSError as e:
        fail(ConfigError(f"Cannot read config file: {e}"))

    logging.basicConfig(
        level=getattr(logging, cfg.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = cfg


@main.command()
@click.argument("data", type=click.Path())
@click.option("--output", "-o", default="text", type=OUTPUT)
@handle_errors
def stats(data: str, output: str) -> None:
    """Print dataset statistics for a dialogue-CSRL file."""
    from crosstalk.corpus import compute_stats, load_dialogues

    report = compute_stats(load_dialogues(data))
    d = report.to_dict()
    text = "\n".join(f"{key:<26} {value}" for key, value in d.items())
    emit(d, text, output)


@main.command()
@click.option("--stage", "-s", type=click.Choice(["clm", "sc", "pa"]), help="Stage to run")
@click.option("--end2end", is_flag=True, help="Optimize all objectives jointly")
@click.option("--parallel", type=click.Path(), help="Parallel sentence pairs (clm)")
@click.option("--dialogues", type=click.Path(), help="Dialogue file (sc)")
@click.option("--srl", type=click.Path(), help="SRL samples (pa)")
@click.option("--init", "init_path", type=click.Path(), help="Checkpoint to resume from")
@click.option("--out", type=click.Path(), help="Checkpoint to write")
@click.option("--steps", type=int, help="Optimization steps (default max_steps)")
@click.option("--output", "-o", default="text", type=OUTPUT)
@click.pass_obj
@handle_errors
def pretrain(
    cfg: CrosstalkConfig,
    stage: Optional[str],
    end2end: bool,
    parallel: Optional[str],
    dialogues: Optional[str],
    srl: Optional[str],
    init_path: Optional[str],
    out: Optional[str],
    steps: Optional[int],
    output: str,
) -> None:
    """Run one pre-training stage, or all of them jointly with --end2end."""
    from crosstalk.pipeline import Pipeline, StageContext
    from crosstalk.stages import ClmStage, End2EndStage, PaStage, ScStage
    from crosstalk.training import MetricsLog

    end2end = end2end or cfg.train.end2end
    if not end2end and stage is None:
        raise ConfigError("Pass --stage or --end2end")
    if steps is not None:
        cfg.apply({"max_steps": steps})
    name = "end2end" if end2end else stage
    if not end2end:
        cfg.apply({"stage": stage})

    stage_cls = {"clm": ClmStage, "sc": ScStage, "pa": PaStage, "end2end": End2EndStage}[name]
    ctx = StageContext(
        data=_pretrain_data(parallel, dialogues, srl),
        checkpoint=_load_checkpoint(init_path),
        metrics=MetricsLog(cfg.metrics_file),
    )
    result = _run_stages(Pipeline([stage_cls(cfg)], name=f"pretrain-{name}", config=cfg), ctx)

    path = result.checkpoint.save(_checkpoint_path(cfg, out, name))
    emit(
        {**result.to_dict(), "checkpoint": str(path)},
        f"{result.summary()}\nCheckpoint: {path}",
        output,
    )


def _pretrain_data(parallel: Optional[str], dialogues: Optional[str], srl: Optional[str]):
    from crosstalk.corpus import load_dialogues, load_parallel, load_srl
    from crosstalk.training import PretrainData

    return PretrainData(
        pairs=load_parallel(parallel) if parallel else [],
        dialogues=load_dialogues(dialogues) if dialogues else [],
        srl=load_srl(srl) if srl else [],
    )


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path(), help="Training dialogues")
@click.option("--dev", "dev_path", type=click.Path(), help="Dev dialogues for early stopping")
@click.option("--init", "init_path", type=click.Path(), help="Pre-trained checkpoint")
@click.option("--out", type=click.Path(), help="Checkpoint to write")
@click.option("--freeze-lm", is_flag=True, help="Keep the language model frozen")
@click.option("--output", "-o", default="text", type=OUTPUT)
@click.pass_obj
@handle_errors
def train(
    cfg: CrosstalkConfig,
    train_path: str,
    dev_path: Optional[str],
    init_path: Optional[str],
    out: Optional[str],
    freeze_lm: bool,
    output: str,
) -> None:
    """Train CSRL on annotated dialogues."""
    from crosstalk.corpus import load_dialogues
    from crosstalk.models import LabelInventory
    from crosstalk.pipeline import Pipeline, StageContext
    from crosstalk.stages import CsrlStage
    from crosstalk.training import MetricsLog

    if freeze_lm:
        cfg.apply({"freeze_lm": True})
    inventory = LabelInventory(cfg.roles)
    init = _load_checkpoint(init_path)
    if init is not None:
        init.check_inventory(inventory)

    ctx = StageContext(
        train=load_dialogues(train_path, inventory),
        dev=load_dialogues(dev_path, inventory) if dev_path else [],
        checkpoint=init,
        inventory=inventory,
        metrics=MetricsLog(cfg.metrics_file),
    )
    result = _run_stages(Pipeline([CsrlStage(cfg)], name="train", config=cfg), ctx)

    path = result.checkpoint.save(_checkpoint_path(cfg, out, "csrl"))
    emit(
        {**result.to_dict(), "checkpoint": str(path)},
        f"{result.summary()}\nCheckpoint: {path}",
        output,
    )


@main.command(name="eval")
@click.argument("data", type=click.Path())
@click.option("--checkpoint", "checkpoint_path", type=click.Path(), help="Model to evaluate")
@click.option("--predictions", type=click.Path(), help="Score a prediction file instead")
@click.option("--output", "-o", default="text", type=OUTPUT)
@click.pass_obj
@handle_errors
def evaluate_command(
    cfg: CrosstalkConfig,
    data: str,
    checkpoint_path: Optional[str],
    predictions: Optional[str],
    output: str,
) -> None:
    """Score predictions against the gold frames of DATA."""
    from crosstalk.corpus import load_dialogues
    from crosstalk.evaluation import load_predictions, score_predictions
    from crosstalk.models import LabelInventory
    from crosstalk.training import evaluate

    if (checkpoint_path is None) == (predictions is None):
        raise ConfigError("Pass exactly one of --checkpoint or --predictions")

    inventory = LabelInventory(cfg.roles)
    if predictions is not None:
        report = score_predictions(load_dialogues(data, inventory), load_predictions(predictions))
    else:
        checkpoint = _load_checkpoint(checkpoint_path)
        checkpoint.check_inventory(inventory)
        model = checkpoint.build_model(cfg.device)
        report = evaluate(
            model,
            load_dialogues(data, inventory),
            checkpoint.vocabulary,
            inventory,
            checkpoint.config,
            cfg.train.batch_size,
        )
    emit(report.to_dict(), report.format_text(), output)


@main.command()
@click.argument("data", type=click.Path())
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path())
@click.option("--out", type=click.Path(), help="Prediction file (default stdout)")
@click.pass_obj
@handle_errors
def predict(
    cfg: CrosstalkConfig,
    data: str,
    checkpoint_path: str,
    out: Optional[str],
) -> None:
    """Write one predicted frame per line for every predicate in DATA."""
    from crosstalk.corpus import load_dialogues
    from crosstalk.evaluation import write_predictions
    from crosstalk.training import Checkpoint, predict as predict_frames

    checkpoint = Checkpoint.load(checkpoint_path)
    inventory = checkpoint.inventory
    dataset = load_dialogues(data, inventory)
    frames = predict_frames(
        checkpoint.build_model(cfg.device),
        dataset,
        checkpoint.vocabulary,
        inventory,
        checkpoint.config,
        cfg.train.batch_size,
    )
    if out:
        with open(out, "w", encoding="utf-8") as f:
            written = write_predictions(frames, f)
        click.echo(f"Wrote {written} predictions to {out}", err=True)
    else:
        write_predictions(frames, sys.stdout)


@main.command()
@click.option(
    "--objective", required=True, type=click.Choice(["tlm", "hpsi", "spi", "uor", "sai"])
)
@click.option("--data", required=True, type=click.Path(), help="Source corpus")
@click.option("--count", "-n", default=100, show_default=True, help="Examples to write")
@click.option("--out", required=True, type=click.Path(), help="JSON-lines output")
@click.pass_obj
@handle_errors
def dump(cfg: CrosstalkConfig, objective: str, data: str, count: int, out: str) -> None:
    """Write generated pre-training examples as JSON lines."""
    from crosstalk.corpus import load_dialogues, load_parallel, load_srl
    from crosstalk.objectives import build_examples, dump_examples

    if objective in ("tlm", "hpsi"):
        source: Any = load_parallel(data)
    elif objective == "sai":
        source = load_srl(data)
    else:
        source = load_dialogues(data)
    if not source:
        raise CorpusError(f"{data}: no records to build {objective} examples from")

    examples = build_examples(
        objective,
        source,
        count,
        cfg.train.seed,
        mask_rate=cfg.train.mask_rate,
        spi_ratio=cfg.train.spi_ratio,
        uor_ratio=cfg.train.uor_ratio,
    )
    written = dump_examples(examples, out)
    click.echo(f"Wrote {written} {objective} examples to {out}")


@main.command()
@click.option("--parallel", type=click.Path(), help="Parallel sentence pairs")
@click.option("--dialogues", type=click.Path(), help="Dialogue file for sc")
@click.option("--srl", type=click.Path(), help="SRL samples")
@click.option("--train", "train_path", required=True, type=click.Path(), help="CSRL training data")
@click.option("--dev", "dev_path", type=click.Path(), help="CSRL dev data")
@click.option("--end2end", is_flag=True, help="Joint pre-training instead of staged")
@click.option("--output", "-o", default="text", type=OUTPUT)
@click.pass_obj
@handle_errors
def run(
    cfg: CrosstalkConfig,
    parallel: Optional[str],
    dialogues: Optional[str],
    srl: Optional[str],
    train_path: str,
    dev_path: Optional[str],
    end2end: bool,
    output: str,
) -> None:
    """Run every stage in order, saving a checkpoint after each one."""
    from crosstalk.corpus import load_dialogues
    from crosstalk.models import LabelInventory, StageResult
    from crosstalk.pipeline import Pipeline, StageContext
    from crosstalk.training import MetricsLog

    out_dir = Path(cfg.output_dir)
    inventory = LabelInventory(cfg.roles)

    def save(result: StageResult) -> None:
        if result.checkpoint is not None:
            result.checkpoint.save(out_dir / f"{result.stage_name}.pt")

    factory = Pipeline.end2end if end2end or cfg.train.end2end else Pipeline.hierarchical
    pipeline = factory(cfg, on_stage_complete=save)
    ctx = StageContext(
        data=_pretrain_data(parallel, dialogues, srl),
        train=load_dialogues(train_path, inventory),
        dev=load_dialogues(dev_path, inventory) if dev_path else [],
        inventory=inventory,
        metrics=MetricsLog(cfg.metrics_file),
    )
    if output == "text":
        click.echo(f"Running pipeline {pipeline.name}...")
    result = _run_stages(pipeline, ctx)
    emit(result.to_dict(), result.summary(), output)


@main.command()
@click.option("--output", "-o", default="text", type=OUTPUT)
@click.pass_obj
def config(cfg: CrosstalkConfig, output: str) -> None:
    """Show the effective configuration."""
    values = cfg.to_dict()
    lines = ["crosstalk configuration", "=" * 40]
    lines.extend(f"{key:<20} {value}" for key, value in values.items())
    emit(values, "\n".join(lines), output)


if __name__ == "__main__":
    main()

"""
Checkpoints with per-block content digests.

A checkpoint is a plain dictionary written with ``torch.save``: a versioned
header, the model configuration, vocabulary, role inventory, completed
stages, one state dict per block and the SHA-256 digest of each block.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import torch
import torch.nn as nn

from crosstalk.config import ModelConfig
from crosstalk.errors import CheckpointMismatchError
from crosstalk.model.csrl import BLOCKS, CsrlModel
from crosstalk.model.vocab import Vocabulary
from crosstalk.models import LabelInventory

logger = logging.getLogger(__name__)

FORMAT = "crosstalk.checkpoint"
VERSION = 1
EMPTY_DIGEST = hashlib.sha256(b"").hexdigest()

StateDict = Dict[str, torch.Tensor]


def digest(block: nn.Module | Mapping[str, torch.Tensor]) -> str:
    """
    SHA-256 over a parameter block's names, dtypes, shapes and raw bytes.

    An empty block hashes to ``EMPTY_DIGEST``.
    """
    state = block.state_dict() if isinstance(block, nn.Module) else block
    h = hashlib.sha256()
    for name in sorted(state):
        tensor = state[name].detach().cpu().contiguous()
        h.update(name.encode("utf-8"))
        h.update(str(tensor.dtype).encode("utf-8"))
        h.update(str(tuple(tensor.shape)).encode("utf-8"))
        h.update(tensor.reshape(-1).view(torch.uint8).numpy().tobytes())
    return h.hexdigest()


def block_digests(model: CsrlModel) -> Dict[str, str]:
    return {name: digest(block) for name, block in model.blocks().items()}


@dataclass
class Checkpoint:
    """Everything needed to rebuild a model and continue the stage sequence."""

    model_config: Dict[str, Any]
    vocab: List[str]
    roles: List[str]
    blocks: Dict[str, StateDict]
    stages: List[str] = field(default_factory=list)
    digests: Dict[str, str] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.digests:
            self.digests = {name: digest(state) for name, state in self.blocks.items()}

    @classmethod
    def from_model(
        cls,
        model: CsrlModel,
        vocab: Vocabulary,
        inventory: LabelInventory,
        stages: Optional[List[str]] = None,
        metrics: Optional[Dict[str, Any]] = None,
    ) -> "Checkpoint":
        blocks = {
            name: {k: v.detach().cpu().clone() for k, v in block.state_dict().items()}
            for name, block in model.blocks().items()
        }
        return cls(
            model_config=asdict(model.config),
            vocab=list(vocab.tokens),
            roles=list(inventory.roles),
            blocks=blocks,
            stages=list(stages or []),
            metrics=dict(metrics or {}),
        )

    @property
    def config(self) -> ModelConfig:
        return ModelConfig(**self.model_config)

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(self.vocab)

    @property
    def inventory(self) -> LabelInventory:
        return LabelInventory(self.roles)

    def has_stage(self, stage: str) -> bool:
        return stage in self.stages

    def verify(self) -> None:
        """Recompute every block digest and compare with the stored one."""
        for name in BLOCKS:
            if name not in self.blocks:
                raise CheckpointMismatchError(f"Checkpoint is missing block '{name}'")
            actual = digest(self.blocks[name])
            if actual != self.digests.get(name):
                raise CheckpointMismatchError(f"Digest mismatch for block '{name}'")

    def check_inventory(self, inventory: LabelInventory) -> None:
        if inventory != self.inventory:
            raise CheckpointMismatchError(
                f"Label inventory {list(inventory.roles)} does not match "
                f"checkpoint roles {self.roles}"
            )

    def build_model(self, device: str = "cpu") -> CsrlModel:
        """Instantiate a CsrlModel holding this checkpoint's parameters."""
        model = CsrlModel(self.config, len(self.vocab), len(self.inventory))
        for name, block in model.blocks().items():
            block.load_state_dict(self.blocks[name])
        return model.to(device)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "header": {"format": FORMAT, "version": VERSION},
            "model_config": self.model_config,
            "vocab": self.vocab,
            "roles": self.roles,
            "stages": self.stages,
            "blocks": self.blocks,
            "digests": self.digests,
            "metrics": self.metrics,
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(self.to_dict(), path)
        logger.info(f"Saved checkpoint to {path} (stages: {', '.join(self.stages) or 'none'})")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        """
        Load and verify a checkpoint file.

        Raises:
            FileNotFoundError: When the file does not exist
            CheckpointMismatchError: On an unknown header or a digest mismatch
        """
        data = torch.load(Path(path), map_location="cpu", weights_only=True)
        header = data.get("header", {}) if isinstance(data, dict) else {}
        if header.get("format") != FORMAT:
            raise CheckpointMismatchError(f"{path} is not a crosstalk checkpoint")
        if header.get("version") != VERSION:
            raise CheckpointMismatchError(
                f"{path}: unsupported checkpoint version {header.get('version')}"
            )
        checkpoint = cls(
            model_config=data["model_config"],
            vocab=data["vocab"],
            roles=data["roles"],
            blocks=data["blocks"],
            stages=data.get("stages", []),
            digests=data["digests"],
            metrics=data.get("metrics", {}),
        )
        checkpoint.verify()
        return checkpoint

"""
Self-describing checkpoints.

A checkpoint is a torch.save'd dict:

    {"format": "qasl-checkpoint/v1",
     "model_config": {...}, "adapter_config": {...} | None,
     "mask": {"regime": ..., "paths": [...]} | None,
     "reformulation": {"mode": ..., "use_requested": ...},
     "reports": [...TrainReport dicts],
     "base": None | "<path of the full checkpoint>",
     "state_dict": {name: tensor}}

With trainable_only=True only the masked tensors are stored and `base`
points at the full checkpoint they apply to (adapter-only checkpoints are a
few MB instead of the whole backbone). Loading uses weights_only=True.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import torch

from corpus.exceptions import QaslError
from corpus.types import AdapterConfig, ModelConfig
from corpus.utils import atomic_write_bytes

from .span_model import SpanModel, TrainableMask, build_model, insert_adapters

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "qasl-checkpoint/v1"


class CheckpointError(QaslError):
    kind = "checkpoint"


@dataclass
class CheckpointInfo:
    model_config: ModelConfig
    adapter_config: Optional[AdapterConfig] = None
    mask_regime: Optional[str] = None
    mask_paths: tuple[str, ...] = ()
    reformulation: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)
    base: Optional[str] = None


def save_checkpoint(
    path: Union[str, Path],
    model: SpanModel,
    mask: Optional[TrainableMask] = None,
    reports: Sequence[dict] = (),
    reformulation: Optional[dict] = None,
    trainable_only: bool = False,
    base: Optional[Union[str, Path]] = None,
) -> Path:
    if trainable_only and (mask is None or base is None):
        raise CheckpointError("trainable_only checkpoints need a mask and a base checkpoint")
    state = {
        name: tensor.detach().cpu().clone()
        for name, tensor in model.state_dict().items()
        if not trainable_only or name in mask
    }
    payload = {
        "format": CHECKPOINT_FORMAT,
        "model_config": model.config.to_dict(),
        "adapter_config": model.adapter_config.to_dict() if model.adapter_config else None,
        "mask": {"regime": mask.regime, "paths": sorted(mask.paths)} if mask is not None else None,
        "reformulation": dict(reformulation or {}),
        "reports": list(reports),
        "base": str(base) if trainable_only else None,
        "state_dict": state,
    }
    buffer = io.BytesIO()
    torch.save(payload, buffer)
    logger.info("Saving checkpoint %s (%d tensors%s)", path, len(state), ", trainable only" if trainable_only else "")
    return atomic_write_bytes(path, buffer.getvalue())


def _read(path: Union[str, Path]) -> dict:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    return payload


def load_checkpoint(path: Union[str, Path], base: Optional[Union[str, Path]] = None) -> tuple[SpanModel, CheckpointInfo]:
    """Rebuild the model; a trainable-only checkpoint is applied on top of its base."""
    payload = _read(path)
    model_config = ModelConfig(**payload["model_config"])
    adapter_config = AdapterConfig.from_dict(payload["adapter_config"]) if payload["adapter_config"] else None

    base_path = base or payload.get("base")
    if base_path:
        model, _ = load_checkpoint(base_path)
        if adapter_config is not None and not model.has_adapters:
            insert_adapters(model, adapter_config)
        missing, unexpected = model.load_state_dict(payload["state_dict"], strict=False)
        if unexpected:
            raise CheckpointError(f"{path}: tensors not in base model", details=list(unexpected))
    else:
        model = build_model(model_config, adapter_config)
        model.load_state_dict(payload["state_dict"])

    mask = payload.get("mask") or {}
    info = CheckpointInfo(
        model_config=model_config,
        adapter_config=adapter_config,
        mask_regime=mask.get("regime"),
        mask_paths=tuple(mask.get("paths", ())),
        reformulation=payload.get("reformulation") or {},
        reports=payload.get("reports") or [],
        base=payload.get("base"),
    )
    return model, info

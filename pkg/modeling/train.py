"""
One QA-tuning stage over a QA corpus.

Rules:
- exactly epochs * ceil(N / batch_size) Adam steps, one shuffled pass per
  epoch with a stage-local seed
- loss = CE(start position) + CE(end position), averaged over the batch,
  padding excluded from the softmax
- unanswerable examples (and answers cut off by truncation) target the
  no-answer anchor for both start and end
- only parameters in the regime's mask receive updates
"""

from __future__ import annotations

import hashlib
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import torch
from torch import nn

from corpus.exceptions import EmptyCorpusError, TrainingDivergedError
from corpus.loaders import QADataset
from corpus.types import FineTuneConfig, Regime

from .span_model import (
    SpanModel,
    apply_mask,
    collate,
    count_parameters,
    count_trainable,
    insert_adapters,
    reset_head,
    select_trainable,
)

logger = logging.getLogger(__name__)


@dataclass
class TrainReport:
    stage_label: str
    regime: str
    corpus: str
    seed: int
    examples: int
    steps: int = 0
    losses: list[float] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)
    trainable_parameters: int = 0
    total_parameters: int = 0
    wall_time_seconds: float = 0.0
    checkpoint: Optional[str] = None
    config: dict = field(default_factory=dict)

    @property
    def final_loss(self) -> Optional[float]:
        return self.losses[-1] if self.losses else None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["final_loss"] = self.final_loss
        return data


def stage_seed(seed: int, stage_label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stage_label}".encode("utf-8")).hexdigest()
    return int(digest[:8], 16)


@dataclass(frozen=True)
class _Target:
    start: int
    end: int


def _targets(model: SpanModel, qa: QADataset):
    pairs, targets = [], []
    for ex in qa.examples:
        pair = model.encode(ex.question, ex.context, ex.user_region, ex.qid)
        span = None
        if not ex.is_impossible:
            span = pair.token_span(ex.answer_start, ex.answer_end)
            if span is None:
                logger.warning("Answer for %s lost to truncation; training it as unanswerable", ex.qid)
        if span is None:
            targets.append(_Target(pair.anchor, pair.anchor))
        else:
            targets.append(_Target(*span))
        pairs.append(pair)
    return pairs, targets


def span_loss(
    start_logits: torch.Tensor,
    end_logits: torch.Tensor,
    attention_mask: torch.Tensor,
    start_positions: torch.Tensor,
    end_positions: torch.Tensor,
) -> torch.Tensor:
    blocked = ~attention_mask.bool()
    start_logits = start_logits.masked_fill(blocked, torch.finfo(start_logits.dtype).min)
    end_logits = end_logits.masked_fill(blocked, torch.finfo(end_logits.dtype).min)
    return nn.functional.cross_entropy(start_logits, start_positions) + nn.functional.cross_entropy(
        end_logits, end_positions
    )


def prepare_model(model: SpanModel, cfg: FineTuneConfig, seed: int):
    """Insert adapters if the regime needs them, then select and apply the mask."""
    if cfg.regime is Regime.ADAPTERS and not model.has_adapters:
        insert_adapters(model, cfg.adapter, seed=seed)
    mask = select_trainable(model, cfg.regime, bitfit_all_biases=cfg.bitfit_all_biases)
    params = apply_mask(model, mask)
    return mask, params


def _lr_lambda(cfg: FineTuneConfig, total_steps: int):
    def factor(step: int) -> float:
        if cfg.warmup_steps and step < cfg.warmup_steps:
            return (step + 1) / cfg.warmup_steps
        if cfg.linear_decay:
            remaining = total_steps - step
            span = max(1, total_steps - cfg.warmup_steps)
            return max(0.0, remaining / span)
        return 1.0

    return factor


def run_stage(
    model: SpanModel,
    qa: QADataset,
    cfg: FineTuneConfig,
    seed: int = 0,
    stage_label: str = "stage2",
) -> tuple[SpanModel, TrainReport]:
    if not qa.examples:
        raise EmptyCorpusError(f"{stage_label}: corpus {qa.name!r} has no examples")

    started = time.monotonic()
    local_seed = stage_seed(seed, stage_label)
    if cfg.reinit_head:
        reset_head(model, local_seed)
    mask, params = prepare_model(model, cfg, seed)

    report = TrainReport(
        stage_label=stage_label,
        regime=cfg.regime.value,
        corpus=qa.name,
        seed=seed,
        examples=len(qa.examples),
        trainable_parameters=count_trainable(model, mask),
        total_parameters=count_parameters(model),
        config=cfg.to_dict(),
    )
    logger.info(
        "%s: regime %s, %d examples, %d/%d trainable parameters",
        stage_label, cfg.regime.value, len(qa.examples), report.trainable_parameters, report.total_parameters,
    )
    if cfg.epochs == 0:
        report.wall_time_seconds = time.monotonic() - started
        return model, report

    pairs, targets = _targets(model, qa)
    n = len(pairs)
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    total_steps = cfg.epochs * steps_per_epoch

    optimizer = torch.optim.Adam(params, lr=cfg.learning_rate)
    scheduler = None
    if cfg.warmup_steps or cfg.linear_decay:
        scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, _lr_lambda(cfg, total_steps))

    device = next(model.parameters()).device
    generator = torch.Generator().manual_seed(local_seed)
    model.train()
    step = 0
    for epoch in range(cfg.epochs):
        order = torch.randperm(n, generator=generator).tolist()
        epoch_total = 0.0
        for offset in range(0, n, cfg.batch_size):
            batch = order[offset:offset + cfg.batch_size]
            input_ids, token_type_ids, attention_mask = collate([pairs[i] for i in batch], device=device)
            start_positions = torch.tensor([targets[i].start for i in batch], device=device)
            end_positions = torch.tensor([targets[i].end for i in batch], device=device)

            start_logits, end_logits = model(input_ids, token_type_ids, attention_mask)
            loss = span_loss(start_logits, end_logits, attention_mask, start_positions, end_positions)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"{stage_label}: non-finite loss at step {step} (epoch {epoch})",
                    details=[{"step": step, "epoch": epoch, "loss": float(loss), "batch_qids": [pairs[i].qid for i in batch]}],
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            if cfg.max_grad_norm:
                nn.utils.clip_grad_norm_(params, cfg.max_grad_norm)
            optimizer.step()
            if scheduler is not None:
                scheduler.step()

            value = float(loss.detach())
            report.losses.append(value)
            epoch_total += value * len(batch)
            step += 1
        report.epoch_losses.append(epoch_total / n)
        logger.info("%s epoch %d/%d: mean loss %.4f", stage_label, epoch + 1, cfg.epochs, report.epoch_losses[-1])

    report.steps = step
    report.wall_time_seconds = time.monotonic() - started
    logger.info("%s finished: %d steps in %.1fs", stage_label, step, report.wall_time_seconds)
    return model, report

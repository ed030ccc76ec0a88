"""
Logits → span or explicit no-answer.

A span (i, j) scores start[i] + end[j] and is valid when
i <= j < i + max_span_tokens with both ends inside the user-utterance token
region. The no-answer score is start[anchor] + end[anchor]. The prediction
is no-answer iff no_answer_score + threshold >= best span score; an empty
region is always no-answer. Ties go to the earliest start, then the
shortest span.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from corpus.conf import qasl_setting
from corpus.loaders import QADataset
from corpus.types import SpanPrediction
from corpus.utils import atomic_write_text

from .span_model import SpanModel, collate


@dataclass(frozen=True)
class DecodeConfig:
    max_span_tokens: int = 30
    threshold: float = 0.0

    def __post_init__(self):
        if self.max_span_tokens < 1:
            raise ValueError("max_span_tokens must be >= 1")

    @classmethod
    def from_settings(cls, **overrides) -> "DecodeConfig":
        values = {
            "max_span_tokens": qasl_setting("MAX_SPAN_TOKENS"),
            "threshold": qasl_setting("NO_ANSWER_THRESHOLD"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def decode(
    start_logits: Sequence[float],
    end_logits: Sequence[float],
    valid_region: tuple[int, int],
    offset_map: Sequence[Optional[tuple[int, int]]],
    raw_context: str,
    cfg: DecodeConfig = DecodeConfig(),
    anchor: int = 0,
    qid: str = "",
) -> SpanPrediction:
    """Best span in context character coordinates, or no-answer."""
    start = np.asarray(start_logits, dtype=np.float64)
    end = np.asarray(end_logits, dtype=np.float64)
    if start.shape != end.shape or start.shape[0] != len(offset_map):
        raise ValueError("logits and offset map must be aligned")

    no_answer_score = float(start[anchor] + end[anchor])
    lo, hi = valid_region
    if hi <= lo:
        return SpanPrediction.no_answer(qid, no_answer_score, no_answer_score)

    n = hi - lo
    scores = start[lo:hi, None] + end[None, lo:hi]
    i, j = np.indices((n, n))
    allowed = (j >= i) & (j - i < cfg.max_span_tokens)
    scores = np.where(allowed, scores, -np.inf)

    # row-major argmax: earliest start, then shortest span
    flat = int(np.argmax(scores))
    best_i, best_j = divmod(flat, n)
    best = float(scores[best_i, best_j])

    if no_answer_score + cfg.threshold >= best:
        return SpanPrediction.no_answer(qid, best, no_answer_score)

    char_start = offset_map[lo + best_i][0]
    char_end = offset_map[lo + best_j][1]
    return SpanPrediction(
        qid=qid,
        text=raw_context[char_start:char_end],
        start=char_start,
        end=char_end,
        score=best,
        no_answer_score=no_answer_score,
    )


def batch_decode(
    model: SpanModel,
    qa: QADataset,
    cfg: Optional[DecodeConfig] = None,
    batch_size: int = 64,
) -> list[SpanPrediction]:
    """
    Decode every example in order. Offsets in the returned predictions are
    relative to each example's user utterance.
    """
    cfg = cfg or DecodeConfig.from_settings()
    predictions: list[SpanPrediction] = []
    if not qa.examples:
        return predictions

    device = next(model.parameters()).device
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            for offset in range(0, len(qa.examples), batch_size):
                examples = qa.examples[offset:offset + batch_size]
                pairs = [model.encode(ex.question, ex.context, ex.user_region, ex.qid) for ex in examples]
                start, end = model(*collate(pairs, device=device))
                start = start.double().cpu().numpy()
                end = end.double().cpu().numpy()
                for row, (ex, pair) in enumerate(zip(examples, pairs)):
                    n = len(pair)
                    pred = decode(
                        start[row, :n],
                        end[row, :n],
                        pair.valid_region,
                        pair.offsets,
                        ex.context,
                        cfg,
                        anchor=pair.anchor,
                        qid=ex.qid,
                    )
                    if not pred.is_no_answer:
                        shift = ex.user_region[0]
                        pred = replace(pred, start=pred.start - shift, end=pred.end - shift)
                    predictions.append(pred)
    finally:
        model.train(was_training)
    return predictions


def write_predictions(path: Path | str, predictions: Sequence[SpanPrediction]) -> Path:
    lines = [json.dumps(p.to_dict(), ensure_ascii=False) for p in predictions]
    return atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_predictions(path: Path | str) -> list[SpanPrediction]:
    predictions = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                predictions.append(SpanPrediction.from_dict(json.loads(line)))
    return predictions

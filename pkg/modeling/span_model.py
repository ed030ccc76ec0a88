"""
Span-extraction model: encoder + QA head, adapter insertion, and trainable
parameter selection for the four fine-tuning regimes.

Input layout is [CLS] question [SEP] context [SEP]. Position 0 ([CLS]) is
the no-answer anchor. Only context tokens that fall inside the user
utterance may start or end an answer.

Regimes:
- full: every parameter
- head_only: QA head only
- bitfit: attention-layer biases + QA head (all biases with the wide flag)
- adapters: adapter parameters + QA head
The QA head trains in every regime.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
import torch
from torch import nn

from corpus.exceptions import AdapterConfigError, QuestionTooLongError, RegimeError
from corpus.types import AdapterConfig, ModelConfig, Regime

from .adapters import Adapter, adapter_parameter_count, bottleneck_widths
from .encoder import ATTENTION_BIAS, CLS_ID, OTHER_BIAS, PAD_ID, SEP_ID, ToyEncoder, classify_parameter
from .heads import QAHead

logger = logging.getLogger(__name__)

HEAD_PREFIX = "head."


@dataclass(frozen=True)
class EncodedPair:
    qid: str
    input_ids: tuple[int, ...]
    token_type_ids: tuple[int, ...]
    offsets: tuple[Optional[tuple[int, int]], ...]
    special_positions: tuple[int, ...]
    valid_region: tuple[int, int]
    truncated_tokens: int = 0

    @property
    def anchor(self) -> int:
        return self.special_positions[0]

    def __len__(self) -> int:
        return len(self.input_ids)

    def token_span(self, char_start: int, char_end: int) -> Optional[tuple[int, int]]:
        """Token range covering [char_start, char_end) of the context, or None if truncated away."""
        first = last = None
        for i, offset in enumerate(self.offsets):
            if offset is None:
                continue
            if first is None and offset[1] > char_start:
                first = i
            if offset[0] < char_end:
                last = i
        if first is None or last is None or last < first:
            return None
        if self.offsets[last][1] < char_end:
            return None
        return first, last


@dataclass(frozen=True)
class TrainableMask:
    paths: frozenset[str]
    regime: str = ""

    def __contains__(self, path: object) -> bool:
        return path in self.paths

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(sorted(self.paths))


class SpanOutput(NamedTuple):
    start_logits: np.ndarray
    end_logits: np.ndarray
    offset_map: tuple[Optional[tuple[int, int]], ...]
    special_positions: tuple[int, ...]
    valid_region: tuple[int, int]


class SpanModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.encoder = ToyEncoder(config)
        self.head = QAHead(config)
        self.adapter_config: Optional[AdapterConfig] = None

    def forward(
        self,
        input_ids: torch.Tensor,
        token_type_ids: torch.Tensor,
        attention_mask: torch.Tensor,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        hidden = self.encoder(input_ids, token_type_ids, attention_mask)
        return self.head(hidden)

    @property
    def has_adapters(self) -> bool:
        return any(layer.adapter is not None for layer in self.encoder.layers)

    def parameter_kinds(self) -> list[tuple[str, torch.Tensor, str]]:
        kinds = self.encoder.parameter_kinds(prefix="encoder.")
        kinds += [
            (HEAD_PREFIX + path, param, classify_parameter(HEAD_PREFIX + path))
            for path, param in self.head.named_parameters()
        ]
        return kinds

    def encode(
        self,
        question: str,
        context: str,
        user_region: Optional[tuple[int, int]] = None,
        qid: str = "",
    ) -> EncodedPair:
        """
        Tokenize a question/context pair. An over-long pair loses context
        tokens from the tail (logged); an over-long question is an error.
        """
        tokenizer = self.encoder.tokenizer
        q_ids, _ = tokenizer.tokenize(question)
        c_ids, c_offsets = tokenizer.tokenize(context)
        budget = self.config.max_position - len(q_ids) - 3
        if budget < 1:
            raise QuestionTooLongError(
                f"{qid or 'question'}: {len(q_ids)} question tokens leave no room for context "
                f"(max_position {self.config.max_position})"
            )
        truncated = max(0, len(c_ids) - budget)
        if truncated:
            logger.warning("Truncated %d context tokens for %s", truncated, qid or "<unnamed>")
            c_ids = c_ids[:budget]
            c_offsets = c_offsets[:budget]

        context_start = len(q_ids) + 2
        input_ids = (CLS_ID, *q_ids, SEP_ID, *c_ids, SEP_ID)
        token_type_ids = (0,) * context_start + (1,) * (len(c_ids) + 1)
        offsets = (None,) * context_start + tuple(c_offsets) + (None,)
        special = (0, context_start - 1, len(input_ids) - 1)

        region_start, region_end = user_region if user_region is not None else (0, len(context))
        inside = [
            context_start + i
            for i, (s, e) in enumerate(c_offsets)
            if s >= region_start and e <= region_end
        ]
        valid = (inside[0], inside[-1] + 1) if inside else (context_start, context_start)
        return EncodedPair(
            qid=qid,
            input_ids=input_ids,
            token_type_ids=token_type_ids,
            offsets=offsets,
            special_positions=special,
            valid_region=valid,
            truncated_tokens=truncated,
        )


def collate(pairs: Sequence[EncodedPair], device: Optional[torch.device] = None):
    """Pad a batch; returns (input_ids, token_type_ids, attention_mask)."""
    length = max(len(p) for p in pairs)
    input_ids = torch.full((len(pairs), length), PAD_ID, dtype=torch.long)
    token_type_ids = torch.zeros((len(pairs), length), dtype=torch.long)
    attention_mask = torch.zeros((len(pairs), length), dtype=torch.bool)
    for row, pair in enumerate(pairs):
        n = len(pair)
        input_ids[row, :n] = torch.tensor(pair.input_ids)
        token_type_ids[row, :n] = torch.tensor(pair.token_type_ids)
        attention_mask[row, :n] = True
    if device is not None:
        return input_ids.to(device), token_type_ids.to(device), attention_mask.to(device)
    return input_ids, token_type_ids, attention_mask


def build_model(config: ModelConfig, adapter_config: Optional[AdapterConfig] = None, seed: int = 0) -> SpanModel:
    """Seeded construction without touching the global RNG."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = SpanModel(config)
    if adapter_config is not None:
        insert_adapters(model, adapter_config, seed=seed)
    return model


def forward(model: SpanModel, question: str, context: str, user_region: Optional[tuple[int, int]] = None) -> SpanOutput:
    """Single-pair inference returning float64 logits and the offset map."""
    pair = model.encode(question, context, user_region)
    was_training = model.training
    model.eval()
    with torch.no_grad():
        start, end = model(*collate([pair], device=_device(model)))
    model.train(was_training)
    return SpanOutput(
        start_logits=start[0].double().cpu().numpy(),
        end_logits=end[0].double().cpu().numpy(),
        offset_map=pair.offsets,
        special_positions=pair.special_positions,
        valid_region=pair.valid_region,
    )


def _device(model: nn.Module) -> torch.device:
    return next(model.parameters()).device


def insert_adapters(model: SpanModel, cfg: AdapterConfig, seed: int = 0) -> SpanModel:
    """Add one zero-initialised bottleneck adapter per encoder layer, in place."""
    if model.has_adapters:
        raise AdapterConfigError("Adapters already inserted")
    hidden = model.config.hidden_size
    widths = bottleneck_widths(hidden, model.encoder.num_layers, cfg)
    reference = next(model.encoder.parameters())
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        for layer, width in zip(model.encoder.layers, widths):
            layer.adapter = Adapter(hidden, width, cfg.nonlinearity).to(
                device=reference.device, dtype=reference.dtype
            )
    model.adapter_config = cfg
    logger.info(
        "Inserted %d adapters (widths %s, %d parameters)",
        len(widths), widths, sum(adapter_parameter_count(hidden, w) for w in widths),
    )
    return model


def adapter_widths(model: SpanModel) -> list[int]:
    return [layer.adapter.bottleneck for layer in model.encoder.layers if layer.adapter is not None]


def select_trainable(model: SpanModel, regime: Regime | str, bitfit_all_biases: bool = False) -> TrainableMask:
    regime = Regime(regime)
    kinds = model.parameter_kinds()
    head = {path for path, _, _ in kinds if path.startswith(HEAD_PREFIX)}
    if regime is Regime.FULL:
        paths = {path for path, _, _ in kinds}
    elif regime is Regime.HEAD_ONLY:
        paths = head
    elif regime is Regime.BITFIT:
        bias_kinds = {ATTENTION_BIAS, OTHER_BIAS} if bitfit_all_biases else {ATTENTION_BIAS}
        paths = head | {path for path, _, kind in kinds if kind in bias_kinds and not path.startswith(HEAD_PREFIX)}
    else:
        if not model.has_adapters:
            raise RegimeError("The adapters regime needs adapters inserted first")
        paths = head | {path for path, _, _ in kinds if ".adapter." in path}
    return TrainableMask(frozenset(paths), regime.value)


def count_trainable(model: nn.Module, mask: TrainableMask) -> int:
    return sum(param.numel() for path, param in model.named_parameters() if path in mask)


def count_parameters(model: nn.Module) -> int:
    return sum(param.numel() for param in model.parameters())


def trainable_storage_bytes(model: nn.Module, mask: TrainableMask) -> int:
    """float32 storage of the masked parameters."""
    return 4 * count_trainable(model, mask)


def apply_mask(model: nn.Module, mask: TrainableMask) -> list[nn.Parameter]:
    """Set requires_grad from the mask; returns the trainable parameters in model order."""
    trainable = []
    for path, param in model.named_parameters():
        param.requires_grad_(path in mask)
        if path in mask:
            trainable.append(param)
    return trainable


def reset_head(model: SpanModel, seed: int = 0):
    model.head.reset_parameters(seed)

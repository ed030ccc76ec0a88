"""
Encoder contract and the bundled toy backbone.

Any backbone used for span extraction has to provide:
- tokenize(text) → (token ids, character offsets), offsets monotone
- forward(input_ids, token_type_ids, attention_mask) → hidden states [B, T, E]
- parameter_kinds() → (path, tensor, kind) with kind one of
  attention_bias / other_bias / weight
- num_layers

The toy backbone is a small post-norm Transformer encoder with a regex
tokenizer, sized for CPU runs. Dropout is not used, so forward passes are
deterministic.
"""

from __future__ import annotations

import math
import re
import zlib
from typing import Protocol, runtime_checkable

import torch
from torch import nn

from corpus.types import ModelConfig

PAD_ID = 0
CLS_ID = 1
SEP_ID = 2
SLOT_SEP_ID = 3
NUM_RESERVED_IDS = 4

ATTENTION_BIAS = "attention_bias"
OTHER_BIAS = "other_bias"
WEIGHT = "weight"


@runtime_checkable
class EncoderInterface(Protocol):
    hidden_size: int

    @property
    def num_layers(self) -> int: ...

    def tokenize(self, text: str) -> tuple[list[int], list[tuple[int, int]]]: ...

    def forward(
        self,
        input_ids: torch.Tensor,
        token_type_ids: torch.Tensor,
        attention_mask: torch.Tensor,
    ) -> torch.Tensor: ...

    def parameter_kinds(self) -> list[tuple[str, torch.Tensor, str]]: ...


class ToyTokenizer:
    """
    Regex tokenizer: separator token, digit runs, letter runs, single
    punctuation marks. Ids are crc32 buckets above the reserved ids.
    """

    def __init__(self, vocab_size: int, separator_token: str = "<s>"):
        if vocab_size <= NUM_RESERVED_IDS:
            raise ValueError("vocab_size too small for reserved ids")
        self.vocab_size = vocab_size
        self.separator_token = separator_token
        self._pattern = re.compile(re.escape(separator_token) + r"|\d+|[^\W\d_]+|[^\w\s]")

    def token_id(self, token: str) -> int:
        if token == self.separator_token:
            return SLOT_SEP_ID
        bucket = zlib.crc32(token.lower().encode("utf-8")) % (self.vocab_size - NUM_RESERVED_IDS)
        return NUM_RESERVED_IDS + bucket

    def tokenize(self, text: str) -> tuple[list[int], list[tuple[int, int]]]:
        ids = []
        offsets = []
        for match in self._pattern.finditer(text):
            ids.append(self.token_id(match.group(0)))
            offsets.append((match.start(), match.end()))
        return ids, offsets


def classify_parameter(path: str) -> str:
    if path.endswith("bias"):
        return ATTENTION_BIAS if ".attention." in path else OTHER_BIAS
    return WEIGHT


class SelfAttention(nn.Module):
    def __init__(self, hidden_size: int, num_heads: int):
        super().__init__()
        self.num_heads = num_heads
        self.head_dim = hidden_size // num_heads
        self.query = nn.Linear(hidden_size, hidden_size)
        self.key = nn.Linear(hidden_size, hidden_size)
        self.value = nn.Linear(hidden_size, hidden_size)
        self.output = nn.Linear(hidden_size, hidden_size)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.num_heads, self.head_dim).transpose(1, 2)

    def forward(self, x: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        q, k, v = self._split(self.query(x)), self._split(self.key(x)), self._split(self.value(x))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.head_dim)
        blocked = ~attention_mask.bool()[:, None, None, :]
        scores = scores.masked_fill(blocked, torch.finfo(scores.dtype).min)
        context = torch.softmax(scores, dim=-1) @ v
        batch, _, length, _ = context.shape
        return self.output(context.transpose(1, 2).reshape(batch, length, -1))


class EncoderLayer(nn.Module):
    """Attention → add & norm → FFN (→ adapter) → add & norm."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.attention = SelfAttention(config.hidden_size, config.num_heads)
        self.attention_norm = nn.LayerNorm(config.hidden_size)
        self.intermediate = nn.Linear(config.hidden_size, config.intermediate_size)
        self.output = nn.Linear(config.intermediate_size, config.hidden_size)
        self.output_norm = nn.LayerNorm(config.hidden_size)
        self.register_module("adapter", None)

    def forward(self, x: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        h = self.attention_norm(x + self.attention(x, attention_mask))
        f = self.output(nn.functional.gelu(self.intermediate(h)))
        if self.adapter is not None:
            f = self.adapter(f)
        return self.output_norm(h + f)


class ToyEncoder(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.hidden_size = config.hidden_size
        self.tokenizer = ToyTokenizer(config.vocab_size, config.separator_token)
        self.word_embeddings = nn.Embedding(config.vocab_size, config.hidden_size, padding_idx=PAD_ID)
        self.position_embeddings = nn.Embedding(config.max_position, config.hidden_size)
        self.token_type_embeddings = nn.Embedding(2, config.hidden_size)
        self.embedding_norm = nn.LayerNorm(config.hidden_size)
        self.layers = nn.ModuleList(EncoderLayer(config) for _ in range(config.num_layers))

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def tokenize(self, text: str) -> tuple[list[int], list[tuple[int, int]]]:
        return self.tokenizer.tokenize(text)

    def forward(
        self,
        input_ids: torch.Tensor,
        token_type_ids: torch.Tensor,
        attention_mask: torch.Tensor,
    ) -> torch.Tensor:
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)[None, :]
        x = (
            self.word_embeddings(input_ids)
            + self.position_embeddings(positions)
            + self.token_type_embeddings(token_type_ids)
        )
        x = self.embedding_norm(x)
        for layer in self.layers:
            x = layer(x, attention_mask)
        return x

    def parameter_kinds(self, prefix: str = "") -> list[tuple[str, torch.Tensor, str]]:
        return [
            (prefix + path, param, classify_parameter(prefix + path))
            for path, param in self.named_parameters()
        ]


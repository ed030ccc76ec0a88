"""
QA heads: every token gets exactly two logits (span start, span end).

- linear: one [E, 2] projection
- ffn2: E → head_hidden_size → 2 with a GELU in between
"""

from __future__ import annotations

import torch
from torch import nn

from corpus.types import ModelConfig


class QAHead(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.variant = config.head_variant
        if self.variant == "ffn2":
            self.dense = nn.Linear(config.hidden_size, config.head_hidden_size)
            self.activation = nn.GELU()
            self.qa_outputs = nn.Linear(config.head_hidden_size, 2)
        else:
            self.qa_outputs = nn.Linear(config.hidden_size, 2)

    def forward(self, hidden: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if self.variant == "ffn2":
            hidden = self.activation(self.dense(hidden))
        logits = self.qa_outputs(hidden)
        start_logits, end_logits = logits.unbind(dim=-1)
        return start_logits, end_logits

    def reset_parameters(self, seed: int = 0):
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            for module in self.modules():
                if isinstance(module, nn.Linear):
                    module.reset_parameters()

"""
Bottleneck adapters.

One adapter sits on each encoder layer's feed-forward output, before the
residual add and layer norm:

    f' = f + up(act(down(f)))

Bottleneck width for a layer is E // r, where r is the boundary reduction
factor on the first and last layers and the default factor elsewhere. The
up-projection starts at zero, so inserting adapters does not change the
model's outputs.
"""

from __future__ import annotations

import logging

import torch
from torch import nn

from corpus.exceptions import AdapterConfigError
from corpus.types import AdapterConfig, Nonlinearity

logger = logging.getLogger(__name__)

ACTIVATIONS = {
    Nonlinearity.RELU: nn.ReLU,
    Nonlinearity.GELU: nn.GELU,
    Nonlinearity.TANH: nn.Tanh,
    Nonlinearity.SWISH: nn.SiLU,
}


class Adapter(nn.Module):
    def __init__(self, hidden_size: int, bottleneck: int, nonlinearity: Nonlinearity = Nonlinearity.RELU):
        super().__init__()
        self.down_project = nn.Linear(hidden_size, bottleneck)
        self.activation = ACTIVATIONS[Nonlinearity(nonlinearity)]()
        self.up_project = nn.Linear(bottleneck, hidden_size)
        nn.init.zeros_(self.up_project.weight)
        nn.init.zeros_(self.up_project.bias)

    @property
    def bottleneck(self) -> int:
        return self.down_project.out_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.up_project(self.activation(self.down_project(x)))


def adapter_parameter_count(hidden_size: int, bottleneck: int) -> int:
    return 2 * hidden_size * bottleneck + bottleneck + hidden_size


def bottleneck_widths(hidden_size: int, num_layers: int, cfg: AdapterConfig) -> list[int]:
    """Per-layer widths; a factor that does not divide E is floored (min 1) with a warning."""
    if num_layers < 2:
        raise AdapterConfigError(f"Adapters need at least 2 encoder layers, got {num_layers}")
    widths = []
    for index in range(num_layers):
        boundary = index in (0, num_layers - 1)
        factor = cfg.boundary_reduction_factor if boundary else cfg.default_reduction_factor
        if factor > hidden_size:
            raise AdapterConfigError(
                f"Reduction factor {factor} exceeds hidden size {hidden_size}",
                details=[{"layer": index, "factor": factor}],
            )
        if hidden_size % factor:
            logger.warning(
                "Reduction factor %d does not divide hidden size %d; layer %d width floored to %d",
                factor, hidden_size, index, max(1, hidden_size // factor),
            )
        widths.append(max(1, hidden_size // factor))
    return widths

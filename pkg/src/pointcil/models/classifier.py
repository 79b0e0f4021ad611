"""Fully-connected classifier head with a growable output layer."""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn


class ClassifierHead(nn.Module):
    """FC stack ending in a per-class output layer.

    The output layer grows by whole columns (one per new class) across
    incremental states; old columns are preserved bit-for-bit and new ones
    are initialized with the default linear-layer scheme from a caller
    provided generator.
    """

    def __init__(self, in_dim: int, hidden: tuple[int, ...], num_classes: int):
        super().__init__()
        layers = []
        norms = []
        prev = in_dim
        for h in hidden:
            layers.append(nn.Linear(prev, h))
            norms.append(nn.LayerNorm(h))
            prev = h
        self.hidden_layers = nn.ModuleList(layers)
        self.hidden_norms = nn.ModuleList(norms)
        self.output = nn.Linear(prev, num_classes)

    @property
    def num_classes(self) -> int:
        return self.output.out_features

    @property
    def feature_dim(self) -> int:
        return self.output.in_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for layer, norm in zip(self.hidden_layers, self.hidden_norms):
            x = F.relu(norm(layer(x)))
        return self.output(x)

    def predict_proba(self, x: torch.Tensor) -> torch.Tensor:
        return F.softmax(self.forward(x), dim=-1)

    def grow(self, num_new: int, generator: torch.Generator | None = None) -> None:
        """Append num_new output columns, keeping existing ones unchanged."""
        if num_new < 1:
            raise ValueError("num_new must be >= 1")
        old = self.output
        new = nn.Linear(old.in_features, old.out_features + num_new)
        new.to(old.weight.dtype)
        bound = 1.0 / math.sqrt(old.in_features)
        with torch.no_grad():
            weight = torch.empty(
                (old.out_features + num_new, old.in_features), dtype=old.weight.dtype
            )
            bias = torch.empty(old.out_features + num_new, dtype=old.bias.dtype)
            weight[: old.out_features] = old.weight
            bias[: old.out_features] = old.bias
            weight[old.out_features :].uniform_(-bound, bound, generator=generator)
            bias[old.out_features :].uniform_(-bound, bound, generator=generator)
            new.weight.copy_(weight)
            new.bias.copy_(bias)
        self.output = new

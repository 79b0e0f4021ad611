"""Residual geometric attention over local-structure features."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


class GeometricAttention(nn.Module):
    """Channel bottleneck producing a per-structure, per-channel gate.

    The gate is applied residually: output = gate * input + input, so an
    all-zero gate is the identity.
    """

    def __init__(self, struct_feat_dim: int, ratio: int = 4):
        super().__init__()
        if struct_feat_dim % ratio != 0:
            raise ValueError(f"ratio {ratio} does not divide feature dim {struct_feat_dim}")
        self.down = nn.Linear(struct_feat_dim, struct_feat_dim // ratio)
        self.up = nn.Linear(struct_feat_dim // ratio, struct_feat_dim)

    def forward(self, f_m: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (attention map, attended features), both shaped like f_m."""
        gate = torch.sigmoid(self.up(F.relu(self.down(f_m))))
        return gate, gate * f_m + f_m


def global_pool(features: torch.Tensor) -> torch.Tensor:
    """Elementwise max over the structure axis: (..., L, d) -> (..., d)."""
    if features.shape[-2] < 1:
        raise ValueError("cannot pool over zero structures")
    return features.max(dim=-2).values

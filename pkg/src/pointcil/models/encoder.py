"""Per-point feature encoder: T-Net aligned pointwise layers."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..config import ModelConfig


class TNet(nn.Module):
    """Alignment block predicting a dim x dim transform (identity at init bias).

    Pointwise widening layers (layer-normalized, so the block trains without
    batch statistics), max-pool over points, FC head; the predicted matrix is
    added to the identity so an untrained block is near-identity.
    """

    def __init__(self, dim: int, channels: tuple[int, int, int], hidden: tuple[int, ...]):
        super().__init__()
        self.dim = dim
        c1, c2, c3 = channels
        self.lift1 = nn.Linear(dim, c1)
        self.norm1 = nn.LayerNorm(c1)
        self.lift2 = nn.Linear(c1, c2)
        self.norm2 = nn.LayerNorm(c2)
        self.lift3 = nn.Linear(c2, c3)
        self.norm3 = nn.LayerNorm(c3)
        fcs = []
        prev = c3
        for h in hidden:
            fcs.append(nn.Linear(prev, h))
            prev = h
        self.fcs = nn.ModuleList(fcs)
        self.head = nn.Linear(prev, dim * dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, U, dim) -> (B, dim, dim)
        h = F.relu(self.norm1(self.lift1(x)))
        h = F.relu(self.norm2(self.lift2(h)))
        h = F.relu(self.norm3(self.lift3(h)))
        h = h.max(dim=1).values
        for fc in self.fcs:
            h = F.relu(fc(h))
        mat = self.head(h).view(-1, self.dim, self.dim)
        eye = torch.eye(self.dim, dtype=mat.dtype, device=mat.device)
        return mat + eye


class PointEncoder(nn.Module):
    """Maps (B, U, 3) coordinates to (B, U, d_p) per-point features.

    Two alignment blocks (input space and mid-feature space) interleaved
    with pointwise widening layers; permutation-equivariant by construction.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        c1, c2 = cfg.encoder_channels
        self.input_transform = TNet(3, cfg.tnet_channels, cfg.tnet_hidden)
        self.lift1 = nn.Linear(3, c1)
        self.norm1 = nn.LayerNorm(c1)
        self.feature_transform = TNet(c1, cfg.tnet_channels, cfg.tnet_hidden)
        self.lift2 = nn.Linear(c1, c2)
        self.norm2 = nn.LayerNorm(c2)
        self.lift3 = nn.Linear(c2, cfg.point_feat_dim)
        self.point_feat_dim = cfg.point_feat_dim

    def forward(self, points: torch.Tensor) -> torch.Tensor:
        if points.ndim != 3 or points.shape[-1] != 3:
            raise ValueError(f"expected (B, U, 3) points, got {tuple(points.shape)}")
        t_in = self.input_transform(points)
        x = torch.bmm(points, t_in.transpose(1, 2))
        x = F.relu(self.norm1(self.lift1(x)))
        t_feat = self.feature_transform(x)
        x = torch.bmm(x, t_feat.transpose(1, 2))
        x = F.relu(self.norm2(self.lift2(x)))
        return self.lift3(x)

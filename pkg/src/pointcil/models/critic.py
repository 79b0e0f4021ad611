"""Critic supervision: a two-branch scalar gain over (attended features,
attention map), the gain/regression losses, and the task rewards."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn


class CriticNetwork(nn.Module):
    """Scalar gain estimator.

    State branch encodes the attended features, policy branch encodes the
    attention map; both are a kernel-3 convolution along the structure axis
    (length-preserving padding, rectified) followed by fully-connected
    layers. Branch outputs are concatenated and fused to one scalar.
    """

    def __init__(
        self,
        struct_feat_dim: int,
        num_structures: int,
        channels: int,
        state_fc: tuple[int, int],
        policy_fc: int,
    ):
        super().__init__()
        flat = channels * num_structures
        self.state_conv = nn.Conv1d(struct_feat_dim, channels, kernel_size=3, padding=1)
        self.state_fc1 = nn.Linear(flat, state_fc[0])
        self.state_fc2 = nn.Linear(state_fc[0], state_fc[1])
        self.policy_conv = nn.Conv1d(struct_feat_dim, channels, kernel_size=3, padding=1)
        self.policy_fc = nn.Linear(flat, policy_fc)
        self.fuse = nn.Linear(state_fc[1] + policy_fc, 1)

    def forward(
        self, f_p: torch.Tensor, attention: torch.Tensor, detach_inputs: bool = False
    ) -> torch.Tensor:
        """(B, L, d_s) x2 -> (B,) scalar gains.

        detach_inputs cuts the graph at the critic boundary so the
        regression loss cannot reach the feature extractor or attention.
        """
        if f_p.shape != attention.shape:
            raise ValueError(f"shape mismatch: {tuple(f_p.shape)} vs {tuple(attention.shape)}")
        if detach_inputs:
            f_p = f_p.detach()
            attention = attention.detach()
        s = F.relu(self.state_conv(f_p.transpose(1, 2))).flatten(1)
        s = F.relu(self.state_fc1(s))
        s = F.relu(self.state_fc2(s))
        p = F.relu(self.policy_conv(attention.transpose(1, 2))).flatten(1)
        p = F.relu(self.policy_fc(p))
        return self.fuse(torch.cat([s, p], dim=1)).squeeze(1)


def critic_loss(gains: torch.Tensor) -> torch.Tensor:
    """Mean negated gain (minimizing it pushes the gain up)."""
    if gains.numel() == 0:
        raise ValueError("empty gains batch")
    return (-gains).mean()


def regression_loss(gains: torch.Tensor, rewards: torch.Tensor) -> torch.Tensor:
    """Mean squared gap between estimated gains and observed rewards."""
    if gains.shape != rewards.shape:
        raise ValueError(f"length mismatch: {tuple(gains.shape)} vs {tuple(rewards.shape)}")
    return ((gains - rewards.detach()) ** 2).mean()


def _argmax_first(values: np.ndarray) -> int:
    # ties go to the smallest index
    return int(np.argmax(values))


def classification_reward(scores: np.ndarray, label: int) -> int:
    """1 when the top-scoring class matches the label, else 0."""
    if scores.shape[0] < 1:
        raise ValueError("empty score vector")
    return int(_argmax_first(scores) == label)


def amelioration_reward(prob_with: float, prob_without: float) -> int:
    """1 when attention strictly raises the true-class probability."""
    return int(prob_with > prob_without)


def compute_rewards(
    probs_with: np.ndarray, probs_without: np.ndarray, labels: np.ndarray
) -> np.ndarray:
    """Per-sample reward R = R_c + R_a in {0, 1, 2}.

    Both probability batches must come from the same classifier weights.
    """
    rewards = np.empty(labels.shape[0], dtype=np.float64)
    for i, k in enumerate(labels):
        r_c = classification_reward(probs_with[i], int(k))
        r_a = amelioration_reward(float(probs_with[i, k]), float(probs_without[i, k]))
        rewards[i] = r_c + r_a
    return rewards

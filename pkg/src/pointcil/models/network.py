"""The full recognition network and its parameter-group partition."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..config import ModelConfig
from .attention import GeometricAttention, global_pool
from .classifier import ClassifierHead
from .critic import CriticNetwork
from .encoder import PointEncoder
from .reasoning import ConsistencyEmbed, GeometricReasoning, LocalStructures

_DTYPES = {"float32": torch.float32, "float64": torch.float64}


@dataclass
class ForwardBundle:
    """Everything one forward pass produces."""

    point_features: torch.Tensor  # (B, U, d_p)
    f_m: torch.Tensor  # (B, L, d_s) structure features
    attention: torch.Tensor | None  # (B, L, d_s) gate, None when attention is off
    f_p: torch.Tensor  # (B, L, d_s) attended (== f_m when attention is off)
    f_g: torch.Tensor  # (B, d_s) global feature
    f_g_plain: torch.Tensor  # (B, d_s) attention-free global feature
    logits: torch.Tensor  # (B, K)
    structures: LocalStructures


class RecognitionNetwork(nn.Module):
    """Encoder -> geometric reasoning -> attention -> classifier, plus the
    critic and the consistency embeddings used by the auxiliary losses."""

    def __init__(
        self,
        model_cfg: ModelConfig,
        num_structures: int,
        num_neighbors: int,
        num_classes: int,
    ):
        super().__init__()
        self.cfg = model_cfg
        self.num_structures = num_structures
        self.num_neighbors = num_neighbors
        self.encoder = PointEncoder(model_cfg)
        self.reasoning = GeometricReasoning(model_cfg.point_feat_dim, model_cfg.struct_feat_dim)
        self.embed = ConsistencyEmbed(model_cfg.struct_feat_dim, model_cfg.embed_dim)
        self.attention = GeometricAttention(model_cfg.struct_feat_dim, model_cfg.attention_ratio)
        self.critic = CriticNetwork(
            model_cfg.struct_feat_dim,
            num_structures,
            model_cfg.critic_channels,
            model_cfg.critic_state_fc,
            model_cfg.critic_policy_fc,
        )
        self.classifier = ClassifierHead(
            model_cfg.struct_feat_dim, model_cfg.classifier_hidden, num_classes
        )
        self.to(_DTYPES[model_cfg.dtype])

    @property
    def dtype(self) -> torch.dtype:
        return _DTYPES[self.cfg.dtype]

    def forward(
        self,
        points: torch.Tensor,
        use_reasoning: bool = True,
        use_attention: bool = True,
    ) -> ForwardBundle:
        features = self.encoder(points)
        f_m, structures = self.reasoning(
            points,
            features,
            self.num_structures,
            self.num_neighbors,
            apply_offsets=use_reasoning,
        )
        if use_attention:
            gate, f_p = self.attention(f_m)
        else:
            gate, f_p = None, f_m
        f_g = global_pool(f_p)
        f_g_plain = global_pool(f_m) if use_attention else f_g
        logits = self.classifier(f_g)
        return ForwardBundle(features, f_m, gate, f_p, f_g, f_g_plain, logits, structures)

    def parameter_groups(self) -> dict[str, list[nn.Parameter]]:
        """Disjoint optimization groups: backbone (encoder, reasoning,
        embeddings, classifier), attention, critic."""
        return {
            "backbone": [
                *self.encoder.parameters(),
                *self.reasoning.parameters(),
                *self.embed.parameters(),
                *self.classifier.parameters(),
            ],
            "attention": list(self.attention.parameters()),
            "critic": list(self.critic.parameters()),
        }

    def grow_classifier(self, num_new: int, generator: torch.Generator | None = None) -> None:
        self.classifier.grow(num_new, generator)


def build_network(
    model_cfg: ModelConfig,
    num_structures: int,
    num_neighbors: int,
    num_classes: int,
    seed: int,
) -> RecognitionNetwork:
    """Deterministic construction: same seed, same initial weights."""
    torch.manual_seed(seed)
    return RecognitionNetwork(model_cfg, num_structures, num_neighbors, num_classes)

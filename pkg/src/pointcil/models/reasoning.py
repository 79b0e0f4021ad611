"""Adaptive local geometric structures: offset voting, neighbor reselection,
structure features, and category prototypes with the semantic-consistency loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..data.sampling import farthest_point_sampling_batch, knn_query_batch


@dataclass
class LocalStructures:
    """A batch of local geometric structures.

    centroids may be virtual (off the point set) once offsets are applied;
    neighbor_indices always index into the original cloud.
    """

    centroids: torch.Tensor  # (B, L, 3)
    centroid_features: torch.Tensor  # (B, L, d_p)
    neighbor_indices: np.ndarray  # (B, L, m) int64

    @property
    def num_structures(self) -> int:
        return self.centroids.shape[1]

    @property
    def num_neighbors(self) -> int:
        return self.neighbor_indices.shape[2]


def _gather_points(points: torch.Tensor, idx: np.ndarray) -> torch.Tensor:
    # points (B, U, C), idx (B, ...) -> (B, ..., C)
    b = points.shape[0]
    batch_idx = np.arange(b).reshape((b,) + (1,) * (idx.ndim - 1))
    return points[batch_idx, idx]


def build_structures(
    points: torch.Tensor,
    features: torch.Tensor,
    num_structures: int,
    num_neighbors: int,
    start_index: int = 0,
) -> LocalStructures:
    """Initial structures: FPS centroids plus their m nearest neighbors."""
    pts_np = points.detach().cpu().numpy()
    fps_idx = farthest_point_sampling_batch(pts_np, num_structures, start_index)
    centroids = _gather_points(points, fps_idx)
    neigh_idx = knn_query_batch(pts_np, centroids.detach().cpu().numpy(), num_neighbors)
    centroid_feats = _gather_points(features, fps_idx)
    return LocalStructures(centroids, centroid_feats, neigh_idx)


def predict_offsets(
    points: torch.Tensor,
    features: torch.Tensor,
    structures: LocalStructures,
    offset_layer: nn.Linear,
) -> torch.Tensor:
    """Offset voting: mean over neighbors of edge-weight * edge-vector.

    The weight is the offset layer applied to the feature difference
    (centroid feature minus neighbor feature); the edge vector is
    centroid minus neighbor position. Returns (B, L, 3).
    """
    if structures.num_neighbors == 0:
        raise ValueError("structures have no neighbors")
    neigh_feats = _gather_points(features, structures.neighbor_indices)  # (B, L, m, d_p)
    neigh_pts = _gather_points(points, structures.neighbor_indices)  # (B, L, m, 3)
    edge_feat = structures.centroid_features.unsqueeze(2) - neigh_feats
    edge_vec = structures.centroids.unsqueeze(2) - neigh_pts
    weights = offset_layer(edge_feat)  # (B, L, m, 3)
    return (weights * edge_vec).mean(dim=2)


def update_structures(
    points: torch.Tensor,
    features: torch.Tensor,
    structures: LocalStructures,
    offsets: torch.Tensor,
) -> LocalStructures:
    """Move centroids by the offsets and reselect m neighbors from the cloud.

    Centroid features are recomputed as the mean of the new neighbors'
    point features (the moved centroid is generally not a cloud point).
    """
    new_centroids = structures.centroids + offsets
    neigh_idx = knn_query_batch(
        points.detach().cpu().numpy(),
        new_centroids.detach().cpu().numpy(),
        structures.num_neighbors,
    )
    neigh_feats = _gather_points(features, neigh_idx)
    return LocalStructures(new_centroids, neigh_feats.mean(dim=2), neigh_idx)


def structure_features(
    features: torch.Tensor, structures: LocalStructures, struct_layer: nn.Linear
) -> torch.Tensor:
    """Per-structure feature: elementwise max of the projected neighbor
    features; rows stacked as f_m with shape (B, L, d_s)."""
    neigh_feats = _gather_points(features, structures.neighbor_indices)
    return struct_layer(neigh_feats).max(dim=2).values


class GeometricReasoning(nn.Module):
    """Offset layer (d_p -> 3) and structure-feature layer (d_p -> d_s).

    The offset layer starts at zero (deformable-convolution convention):
    centroids stay put until the layer's weights move them.
    """

    def __init__(self, point_feat_dim: int, struct_feat_dim: int):
        super().__init__()
        self.offset_layer = nn.Linear(point_feat_dim, 3)
        self.struct_layer = nn.Linear(point_feat_dim, struct_feat_dim)
        with torch.no_grad():
            self.offset_layer.weight.zero_()
            self.offset_layer.bias.zero_()

    def forward(
        self,
        points: torch.Tensor,
        features: torch.Tensor,
        num_structures: int,
        num_neighbors: int,
        apply_offsets: bool = True,
        start_index: int = 0,
    ) -> tuple[torch.Tensor, LocalStructures]:
        structures = build_structures(points, features, num_structures, num_neighbors, start_index)
        if apply_offsets:
            offsets = predict_offsets(points, features, structures, self.offset_layer)
            structures = update_structures(points, features, structures, offsets)
        f_m = structure_features(features, structures, self.struct_layer)
        return f_m, structures


# ---------------------------------------------------------------------------
# category prototypes and semantic consistency


class PrototypeBank:
    """EMA-maintained per-class global-feature prototypes."""

    def __init__(self, gamma: float = 0.7):
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        self.gamma = gamma
        self.prototypes: dict[int, np.ndarray] = {}
        self.initial_state: dict[int, int] = {}

    def initialized_classes(self) -> list[int]:
        return sorted(self.prototypes)

    def is_initialized(self, class_index: int) -> bool:
        return class_index in self.prototypes

    def stacked(self, dtype: torch.dtype) -> tuple[torch.Tensor, list[int]]:
        classes = self.initialized_classes()
        if not classes:
            raise ValueError("prototype bank is empty")
        mat = np.stack([self.prototypes[k] for k in classes], axis=0)
        return torch.from_numpy(mat).to(dtype), classes

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "classes": {
                str(k): {
                    "proto": [float(v) for v in self.prototypes[k]],
                    "initial_state": self.initial_state[k],
                }
                for k in self.initialized_classes()
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PrototypeBank":
        bank = cls(gamma=float(doc["gamma"]))
        for key, entry in doc["classes"].items():
            k = int(key)
            bank.prototypes[k] = np.asarray(entry["proto"], dtype=np.float64)
            bank.initial_state[k] = int(entry["initial_state"])
        return bank


def batch_prototypes(features: np.ndarray, labels: np.ndarray) -> dict[int, np.ndarray]:
    """Per-class mean of global features over one mini-batch.

    Classes absent from the batch produce no estimate.
    """
    feats = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if feats.shape[0] < 1:
        raise ValueError("empty batch")
    return {int(k): feats[labels == k].mean(axis=0) for k in np.unique(labels)}


def ema_update_prototypes(
    bank: PrototypeBank, estimates: dict[int, np.ndarray], state: int
) -> PrototypeBank:
    """Exponential update of the bank: old-weighted convex combination for
    initialized classes, direct seeding for classes seen the first time."""
    for k, est in estimates.items():
        est = np.asarray(est, dtype=np.float64)
        if bank.is_initialized(k):
            bank.prototypes[k] = bank.gamma * bank.prototypes[k] + (1.0 - bank.gamma) * est
        else:
            bank.prototypes[k] = est.copy()
            bank.initial_state[k] = state
    return bank


def normalize_embed(x: torch.Tensor, centered: bool = False) -> torch.Tensor:
    """Center by the coordinate mean, then divide by the vector norm.

    The denominator is the norm of the uncentered input by default; the
    `centered` switch divides by the centered norm instead.
    """
    mean = x.mean(dim=-1, keepdim=True)
    shifted = x - mean
    norm = torch.linalg.vector_norm(shifted if centered else x, dim=-1, keepdim=True)
    if (norm == 0).any():
        raise ValueError("zero-norm input to embedding normalization")
    return shifted / norm


class ConsistencyEmbed(nn.Module):
    """Shared-space embeddings for local structures and class prototypes."""

    def __init__(self, struct_feat_dim: int, embed_dim: int):
        super().__init__()
        self.embed_local = nn.Linear(struct_feat_dim, embed_dim)
        self.embed_proto = nn.Linear(struct_feat_dim, embed_dim)


def consistency_loss(
    f_m: torch.Tensor,
    labels: np.ndarray,
    proto_matrix: torch.Tensor,
    proto_classes: list[int],
    embed: ConsistencyEmbed,
    tau: float,
    centered: bool = False,
) -> torch.Tensor:
    """Self-supervised semantic consistency between local structures and
    the class prototypes.

    Per structure: log(1 + sum over wrong classes of
    exp(tau * (wrong similarity - true similarity))); summed over the L
    structures of a sample, averaged over the batch. Prototypes enter as
    constants; gradients reach only the embedding layers and upstream
    features.
    """
    class_to_col = {k: i for i, k in enumerate(proto_classes)}
    try:
        pos_cols = torch.tensor([class_to_col[int(k)] for k in labels], dtype=torch.long)
    except KeyError as exc:
        raise ValueError(f"uninitialized prototype for class {exc.args[0]}") from exc
    if len(proto_classes) == 1:
        return torch.zeros((), dtype=f_m.dtype)
    local = normalize_embed(embed.embed_local(f_m), centered)  # (B, L, d_c)
    protos = normalize_embed(embed.embed_proto(proto_matrix.detach()), centered)  # (P, d_c)
    sims = tau * torch.einsum("bld,pd->blp", local, protos)  # (B, L, P)
    pos = sims.gather(2, pos_cols.view(-1, 1, 1).expand(-1, sims.shape[1], 1))
    diffs = sims - pos
    mask = F.one_hot(pos_cols, num_classes=len(proto_classes)).to(torch.bool)
    diffs = diffs.masked_fill(mask.unsqueeze(1), float("-inf"))
    per_structure = F.softplus(torch.logsumexp(diffs, dim=-1))  # log(1 + sum exp)
    return per_structure.sum(dim=1).mean()

"""Plain-classifier reference trainer.

Independent minimal loop (cross-entropy only, one optimizer) used as the
oracle for the degenerate-configuration equivalence check: the incremental
trainer with reasoning/attention/compensations disabled must reproduce this
loss trace.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..config import ModelConfig, TrainConfig
from ..data.manifest import ArrayDataset
from ..data.transforms import augment
from ..models.network import build_network
from .trainer import AUG_CLIP, AUG_ROTATE, AUG_SIGMA, epoch_plan


def train_plain_classifier(
    data: ArrayDataset,
    classes: list[int],
    config: TrainConfig,
    model_config: ModelConfig,
) -> list[float]:
    """Supervised training of encoder + structure features + classifier with
    plain cross-entropy. Returns the per-epoch mean loss trace."""
    model = build_network(
        model_config,
        config.num_structures,
        config.num_neighbors,
        len(classes),
        config.seed,
    )
    col_of = {k: i for i, k in enumerate(classes)}
    cols_all = np.array([col_of[int(k)] for k in data.labels])
    params = model.parameter_groups()["backbone"]
    opt = torch.optim.Adam(params, lr=config.lr, weight_decay=config.weight_decay)
    trace: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order, aug_seeds = epoch_plan(config.seed, 1, epoch, len(data))
        batch_losses = []
        for start in range(0, len(data), config.batch_size):
            idx = order[start : start + config.batch_size]
            pts = np.stack(
                [
                    augment(
                        data.points[i],
                        int(aug_seeds[i]),
                        rotate_z=AUG_ROTATE,
                        jitter_sigma=AUG_SIGMA,
                        jitter_clip=AUG_CLIP,
                    )
                    for i in idx
                ]
            )
            points = torch.from_numpy(pts).to(model.dtype)
            labels = torch.tensor(cols_all[idx], dtype=torch.long)
            bundle = model(points, use_reasoning=False, use_attention=False)
            loss = F.cross_entropy(bundle.logits, labels)
            opt.zero_grad(set_to_none=True)
            loss.backward()
            opt.step()
            batch_losses.append(float(loss.detach()))
        trace.append(float(np.mean(batch_losses)))
    return trace

"""Dual fairness compensations against old/new class imbalance.

Weight fairness: rescale the classifier's new-class output columns so their
mean norm matches the old-class mean norm (training-time). Score fairness:
statistics-based rectification of softmax scores at inference, triggered
only when a query is initially predicted as a current-state class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .models.classifier import ClassifierHead


def weight_fairness_compensation(
    head: ClassifierHead, num_old: int, num_new: int
) -> ClassifierHead:
    """Scale the new-class columns of the last layer by
    mean(old norms) / mean(new norms). No-op signature-level contract:
    requires at least one old and one new class.

    After the call the mean new-column norm equals the mean old-column norm
    up to floating rounding; column directions are unchanged.
    """
    if num_old < 1 or num_new < 1:
        raise ValueError("need at least one old and one new class")
    weight = head.output.weight
    if weight.shape[0] != num_old + num_new:
        raise ValueError(
            f"head has {weight.shape[0]} classes, expected {num_old}+{num_new}"
        )
    with torch.no_grad():
        w64 = weight.detach().to(torch.float64)
        norms = torch.linalg.vector_norm(w64, dim=1)
        new_norms = norms[num_old:]
        if (new_norms == 0).any():
            raise ValueError("zero-norm new-class column; compensation undefined")
        scale = norms[:num_old].mean() / new_norms.mean()
        weight[num_old:] = (w64[num_old:] * scale).to(weight.dtype)
    return head


@dataclass
class ScoreStats:
    """Recorded score statistics for rectification.

    psi_init[k]: mean top score of training samples predicted as class k at
    the end of the state where k was new. initial_state[k]: that state.
    psi_state[s]: mean top score over samples predicted as any of state s's
    new classes. The current-state per-class means (`running`) are transient:
    rebuilt per evaluation from exemplar predictions, then updated over the
    query stream; they are never serialized.
    """

    psi_init: dict[int, float] = field(default_factory=dict)
    initial_state: dict[int, int] = field(default_factory=dict)
    psi_state: dict[int, float] = field(default_factory=dict)
    running: dict[int, tuple[float, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_class": {
                str(k): {
                    "psi_init": self.psi_init[k],
                    "initial_state": self.initial_state[k],
                }
                for k in sorted(self.psi_init)
            },
            "per_state": {
                str(s): {"psi_new_mean": self.psi_state[s]} for s in sorted(self.psi_state)
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ScoreStats":
        stats = cls()
        for key, entry in doc.get("per_class", {}).items():
            stats.psi_init[int(key)] = float(entry["psi_init"])
            stats.initial_state[int(key)] = int(entry["initial_state"])
        for key, entry in doc.get("per_state", {}).items():
            stats.psi_state[int(key)] = float(entry["psi_new_mean"])
        return stats

    def save_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load_json(cls, path: str | Path) -> "ScoreStats":
        return cls.from_dict(json.loads(Path(path).read_text()))

    # -- transient per-evaluation running means (psi_s(k)) ------------------

    def reset_running(self) -> None:
        self.running = {}

    def seed_running(self, class_index: int, mean: float, count: int) -> None:
        self.running[class_index] = (mean * count, count)

    def update_running(self, class_index: int, top_score: float) -> None:
        total, count = self.running.get(class_index, (0.0, 0))
        self.running[class_index] = (total + top_score, count + 1)

    def psi_current(self, class_index: int) -> float:
        if class_index not in self.running:
            raise KeyError(f"no current-state statistic for class {class_index}")
        total, count = self.running[class_index]
        return total / count


def record_score_statistics(
    stats: ScoreStats,
    state: int,
    probs: np.ndarray,
    labels: np.ndarray,
    classes: list[int],
    new_classes: set[int],
) -> ScoreStats:
    """Record end-of-state statistics from training-set predictions.

    probs: (N, K) softmax rows whose column j scores class classes[j].
    For every class new in this state, psi_init is the mean top score over
    samples predicted as that class (falling back to samples labeled as it
    when nothing is predicted as it); psi_state[state] is the mean top score
    over samples predicted as any new class (same labeled fallback).
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    top_scores = probs.max(axis=1)
    pred_cols = probs.argmax(axis=1)
    col_class = np.asarray(classes)
    pred_classes = col_class[pred_cols]
    for k in sorted(new_classes):
        mask = pred_classes == k
        if not mask.any():
            mask = labels == k
        if not mask.any():
            raise ValueError(f"no sample predicted as or labeled with class {k}")
        stats.psi_init[k] = float(top_scores[mask].mean())
        stats.initial_state[k] = state
    new_mask = np.isin(pred_classes, sorted(new_classes))
    if not new_mask.any():
        new_mask = np.isin(labels, sorted(new_classes))
    stats.psi_state[state] = float(top_scores[new_mask].mean())
    return stats


def score_fairness_compensation(
    probs: np.ndarray,
    stats: ScoreStats,
    state: int,
    current_new_classes: set[int],
    classes: list[int],
) -> np.ndarray:
    """Rectify one softmax vector against new-class score bias.

    Applies only when the initial prediction falls in the current state's
    new classes; past classes k (initial_state < state) are scaled by
    (psi_init(k) / psi_current(k)) * (psi_state(state) / psi_state(initial)).
    Current-state classes are never changed. The result is unnormalized and
    intended for argmax decisions.
    """
    probs = np.asarray(probs, dtype=np.float64)
    top = int(np.argmax(probs))
    if classes[top] not in current_new_classes:
        return probs.copy()
    if state not in stats.psi_state:
        raise KeyError(f"no recorded statistics for state {state}")
    psi_now = stats.psi_state[state]
    out = probs.copy()
    for col, k in enumerate(classes):
        if k in current_new_classes:
            continue
        if k not in stats.psi_init:
            raise KeyError(f"missing statistic for past class {k}")
        s_i = stats.initial_state[k]
        if s_i >= state:
            continue
        psi_init = stats.psi_init[k]
        psi_cur = stats.psi_current(k)
        psi_then = stats.psi_state[s_i]
        if psi_cur == 0 or psi_then == 0:
            raise ValueError(f"zero score statistic for class {k}")
        out[col] = probs[col] * (psi_init / psi_cur) * (psi_now / psi_then)
    return out

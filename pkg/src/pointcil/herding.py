"""Herding exemplar selection and the budgeted per-class exemplar store."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def select_exemplars(features: np.ndarray, ids: list, quota: int) -> list:
    """Greedy herding over one class.

    Iteratively pick the sample that brings the running mean of selected
    features closest (Euclidean) to the class mean; ties go to the smaller
    id. Deterministic; selection is without replacement.
    """
    feats = np.asarray(features, dtype=np.float64)
    if quota > feats.shape[0]:
        raise ValueError(f"quota {quota} exceeds {feats.shape[0]} available samples")
    order = sorted(range(len(ids)), key=lambda i: ids[i])
    feats = feats[order]
    sorted_ids = [ids[i] for i in order]
    mu = feats.mean(axis=0)
    chosen: list[int] = []
    remaining = list(range(feats.shape[0]))
    acc = np.zeros_like(mu)
    for t in range(1, quota + 1):
        cand = feats[remaining]
        gap = mu[None, :] - (acc[None, :] + cand) / t
        dist = (gap * gap).sum(axis=1)
        best = remaining[int(np.argmin(dist))]  # first min = smallest id
        chosen.append(best)
        acc = acc + feats[best]
        remaining.remove(best)
    return [sorted_ids[i] for i in chosen]


@dataclass
class ExemplarStore:
    """Budgeted store of old-class exemplar ids, herding-ordered per class."""

    budget: int
    per_class: dict[int, list] = field(default_factory=dict)

    def all_ids(self) -> list:
        out = []
        for k in sorted(self.per_class):
            out.extend(self.per_class[k])
        return out

    def total(self) -> int:
        return sum(len(v) for v in self.per_class.values())

    def quotas(self, classes: list[int]) -> dict[int, int]:
        """Even split of the budget, remainder to the lowest class indices."""
        base, rem = divmod(self.budget, len(classes))
        return {k: base + (1 if rank < rem else 0) for rank, k in enumerate(sorted(classes))}

    def rebalance(
        self,
        classes: list[int],
        class_features: dict[int, tuple[np.ndarray, list]],
    ) -> None:
        """Truncate existing classes to their new quota and herd new ones.

        class_features maps a class to (features, ids) for classes that
        still need selection (i.e. the state's new classes).
        """
        quotas = self.quotas(classes)
        for k in classes:
            quota = quotas[k]
            if k in self.per_class:
                self.per_class[k] = self.per_class[k][:quota]
            else:
                feats, ids = class_features[k]
                self.per_class[k] = select_exemplars(feats, ids, min(quota, len(ids)))

    def to_dict(self) -> dict:
        return {str(k): list(v) for k, v in sorted(self.per_class.items())}

    @classmethod
    def from_dict(cls, budget: int, doc: dict) -> "ExemplarStore":
        store = cls(budget=budget)
        for key, ids in doc.items():
            store.per_class[int(key)] = list(ids)
        return store

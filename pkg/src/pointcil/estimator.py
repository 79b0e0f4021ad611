"""Scikit-learn style estimator facade over the incremental engine.

Each partial_fit call is one incremental state (a batch of previously
unseen classes); fit is the single-state special case. Exemplar replay,
prototype maintenance and both fairness compensations run under the hood
exactly as in the manifest-driven trainer.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_labels, check_point_clouds
from .config import AblationFlags, ModelConfig, TrainConfig
from .data.manifest import ArrayDataset
from .training.trainer import IncrementalTrainer


class IncrementalPointCloudClassifier(ClassifierMixin, BaseEstimator):
    """Class-incremental point-cloud classifier.

    Parameters mirror the training configuration; widths come from the
    model preset. `partial_fit(X, y)` trains one incremental state on the
    classes present in y (which must be new); `predict` scores over all
    classes seen so far, with score rectification when enabled.
    """

    def __init__(
        self,
        lambda1: float = 0.01,
        lambda2: float = 0.1,
        gamma: float = 0.7,
        tau: float = 64.0,
        num_structures: int = 16,
        num_neighbors: int = 8,
        num_points: int = 256,
        batch_size: int = 32,
        lr: float = 0.001,
        weight_decay: float = 0.0005,
        epochs: int = 10,
        exemplar_budget: int = 20,
        seed: int = 0,
        use_reasoning: bool = True,
        use_attention: bool = True,
        weight_compensation: bool = True,
        score_compensation: bool = True,
        model_preset: str = "desk",
    ):
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.gamma = gamma
        self.tau = tau
        self.num_structures = num_structures
        self.num_neighbors = num_neighbors
        self.num_points = num_points
        self.batch_size = batch_size
        self.lr = lr
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.exemplar_budget = exemplar_budget
        self.seed = seed
        self.use_reasoning = use_reasoning
        self.use_attention = use_attention
        self.weight_compensation = weight_compensation
        self.score_compensation = score_compensation
        self.model_preset = model_preset

    # -- construction ------------------------------------------------------

    def _make_trainer(self) -> IncrementalTrainer:
        cfg = TrainConfig(
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            gamma=self.gamma,
            tau=self.tau,
            num_structures=self.num_structures,
            num_neighbors=self.num_neighbors,
            num_points=self.num_points,
            batch_size=self.batch_size,
            lr=self.lr,
            weight_decay=self.weight_decay,
            epochs=self.epochs,
            exemplar_budget=self.exemplar_budget,
            seed=self.seed,
            ablations=AblationFlags(
                cgr=self.use_reasoning,
                cga=self.use_attention,
                wfc=self.weight_compensation,
                sfc=self.score_compensation,
            ),
            schedule=[],
        )
        return IncrementalTrainer(cfg, ModelConfig.preset(self.model_preset))

    def _reset(self) -> None:
        self.trainer_ = self._make_trainer()
        self.n_states_ = 0
        self.classes_ = np.array([], dtype=np.int64)
        self._replay_data = None

    # -- sklearn API ---------------------------------------------------------

    def fit(self, X, y) -> "IncrementalPointCloudClassifier":
        """Single-state supervised fit over all classes in y."""
        self._reset()
        return self.partial_fit(X, y)

    def partial_fit(self, X, y, classes=None) -> "IncrementalPointCloudClassifier":
        """Train one incremental state.

        `classes` optionally pins the state's new classes; defaults to the
        distinct labels in y. All must be unseen so far.
        """
        if not hasattr(self, "trainer_"):
            self._reset()
        X = check_point_clouds(X, self.num_points)
        y = check_labels(y, X.shape[0])
        new_classes = sorted(int(c) for c in (np.unique(y) if classes is None else classes))
        state = self.n_states_ + 1
        ids = [f"s{state}-{i:05d}" for i in range(X.shape[0])]
        state_data = ArrayDataset(X, y, ids)
        self.trainer_.cfg.schedule.append(new_classes)
        self.trainer_.fit_state(state, new_classes, state_data, replay_source=self._replay_data)
        self.n_states_ = state
        self.classes_ = np.array(sorted(self.trainer_.class_order), dtype=np.int64)
        if self.trainer_.store is not None:
            pool = state_data if self._replay_data is None else _concat_unique(
                self._replay_data, state_data
            )
            self._replay_data = pool.select_ids(self.trainer_.store.all_ids())
        return self

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_point_clouds(X, self.num_points)
        return self.trainer_.predict_labels(X, self.n_states_, seed_source=self._replay_data)

    def predict_proba(self, X) -> np.ndarray:
        """Raw (unrectified) class probabilities, columns ordered by classes_."""
        self._check_fitted()
        X = check_point_clouds(X, self.num_points)
        probs = self.trainer_.predict_proba(X)
        order = [self.trainer_.class_order.index(int(c)) for c in self.classes_]
        return probs[:, order]

    def _check_fitted(self) -> None:
        if not hasattr(self, "trainer_") or self.n_states_ == 0:
            raise RuntimeError("estimator is not fitted; call fit or partial_fit first")


def _concat_unique(a: ArrayDataset, b: ArrayDataset) -> ArrayDataset:
    return ArrayDataset(
        np.concatenate([a.points, b.points], axis=0),
        np.concatenate([a.labels, b.labels], axis=0),
        a.ids + b.ids,
    )

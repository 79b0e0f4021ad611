"""Class-incremental 3D point-cloud object recognition.

Geometric reasoning over adaptive local structures, critic-guided
attention, exemplar replay with herding, and dual fairness compensations
against old/new class imbalance.
"""

from .benchmark import run_ablation_suite, summarize, variant_config
from .config import AblationFlags, ConfigError, ModelConfig, TrainConfig
from .estimator import IncrementalPointCloudClassifier
from .fairness import (
    ScoreStats,
    record_score_statistics,
    score_fairness_compensation,
    weight_fairness_compensation,
)
from .herding import ExemplarStore, select_exemplars
from .metrics import emit_report, macro_f1, macro_recall, per_class_accuracy, top1_accuracy
from .training.trainer import (
    IncrementalTrainer,
    classification_loss,
    inference,
    run_incremental,
    total_objective,
)

__version__ = "0.1.0"

__all__ = [
    "AblationFlags",
    "ConfigError",
    "ExemplarStore",
    "IncrementalPointCloudClassifier",
    "IncrementalTrainer",
    "ModelConfig",
    "ScoreStats",
    "TrainConfig",
    "classification_loss",
    "emit_report",
    "inference",
    "macro_f1",
    "macro_recall",
    "per_class_accuracy",
    "record_score_statistics",
    "run_ablation_suite",
    "run_incremental",
    "score_fairness_compensation",
    "select_exemplars",
    "summarize",
    "top1_accuracy",
    "total_objective",
    "variant_config",
    "weight_fairness_compensation",
]

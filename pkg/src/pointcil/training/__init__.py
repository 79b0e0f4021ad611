from .baseline import train_plain_classifier
from .trainer import (
    IncrementalTrainer,
    classification_loss,
    epoch_plan,
    inference,
    run_incremental,
    total_objective,
    write_metrics_files,
)

__all__ = [
    "IncrementalTrainer",
    "classification_loss",
    "epoch_plan",
    "inference",
    "run_incremental",
    "total_objective",
    "train_plain_classifier",
    "write_metrics_files",
]

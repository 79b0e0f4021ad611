"""Evaluation metrics and multi-run report emission."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def _check_aligned(preds: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labels.shape}")
    if preds.size == 0:
        raise ValueError("empty prediction set")
    return preds, labels


def top1_accuracy(preds: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of exact matches."""
    preds, labels = _check_aligned(preds, labels)
    return float((preds == labels).mean())


def _confusion_counts(preds: np.ndarray, labels: np.ndarray, k: int) -> tuple[int, int, int]:
    tp = int(((preds == k) & (labels == k)).sum())
    fp = int(((preds == k) & (labels != k)).sum())
    fn = int(((preds != k) & (labels == k)).sum())
    return tp, fp, fn


def macro_recall(preds: np.ndarray, labels: np.ndarray, num_classes: int) -> float:
    """Unweighted mean per-class recall over classes present in the labels."""
    preds, labels = _check_aligned(preds, labels)
    if preds.max() >= num_classes or labels.max() >= num_classes:
        raise ValueError("class index out of range")
    recalls = []
    for k in range(num_classes):
        tp, _, fn = _confusion_counts(preds, labels, k)
        if tp + fn == 0:  # class absent from labels: excluded
            continue
        recalls.append(tp / (tp + fn))
    return float(np.mean(recalls))


def macro_f1(preds: np.ndarray, labels: np.ndarray, num_classes: int) -> float:
    """Unweighted mean per-class F1 over classes present in the labels;
    zero-denominator F1 counts as 0."""
    preds, labels = _check_aligned(preds, labels)
    if preds.max() >= num_classes or labels.max() >= num_classes:
        raise ValueError("class index out of range")
    scores = []
    for k in range(num_classes):
        tp, fp, fn = _confusion_counts(preds, labels, k)
        if tp + fn == 0:
            continue
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def per_class_accuracy(preds: np.ndarray, labels: np.ndarray) -> dict[int, float]:
    preds, labels = _check_aligned(preds, labels)
    out = {}
    for k in np.unique(labels):
        mask = labels == k
        out[int(k)] = float((preds[mask] == k).mean())
    return out


# ---------------------------------------------------------------------------
# report emission


def emit_report(
    reports: list[dict],
    out_dir: str | Path,
    reference: str | None = None,
    plot_data: bool = True,
) -> dict[str, Path]:
    """Merge per-run metric reports into CSV/JSON (and optional plot data).

    Delta columns (percentage points of avg top-1 against the named
    reference run) are attached when a reference is given; deltas are only
    meaningful between runs with the same seed and schedule, so mismatched
    seeds or state counts are rejected. Byte-deterministic for identical
    inputs.
    """
    if not reports:
        raise ValueError("need at least one report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_id = {r["run_id"]: r for r in reports}
    if reference is not None:
        if reference not in by_id:
            raise ValueError(f"reference run {reference!r} not among {sorted(by_id)}")
        ref = by_id[reference]
        for rep in reports:
            if rep["seed"] != ref["seed"] or len(rep["states"]) != len(ref["states"]):
                raise ValueError(
                    f"run {rep['run_id']!r} has a different seed or state count than "
                    f"the reference; deltas are only defined for matched runs"
                )
    merged: dict = {"runs": []}
    for rep in reports:
        entry = {
            "run_id": rep["run_id"],
            "seed": rep["seed"],
            "avg_top1": rep["avg_top1"],
            "states": rep["states"],
        }
        if reference is not None:
            entry["delta_pp"] = 100.0 * (rep["avg_top1"] - by_id[reference]["avg_top1"])
        merged["runs"].append(entry)
    paths: dict[str, Path] = {}
    json_path = out_dir / "report.json"
    with open(json_path, "w") as fh:
        json.dump(merged, fh, indent=1, sort_keys=True)
        fh.write("\n")
    paths["json"] = json_path

    header = "run_id,state,top1,macro_f1,macro_recall"
    lines = [header + (",delta_pp" if reference is not None else "")]
    for entry in merged["runs"]:
        for s in entry["states"]:
            row = f"{entry['run_id']},{s['s']},{s['top1']!r},{s['macro_f1']!r},{s['macro_recall']!r}"
            if reference is not None:
                row += ","
            lines.append(row)
        avg_row = f"{entry['run_id']},avg,{entry['avg_top1']!r},,"
        if reference is not None:
            avg_row += f",{entry['delta_pp']!r}"
        lines.append(avg_row)
    csv_path = out_dir / "report.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    paths["csv"] = csv_path

    if plot_data:
        plot = {
            "x_label": "state",
            "y_label": "top1_accuracy",
            "series": [
                {
                    "run_id": entry["run_id"],
                    "x": [s["s"] for s in entry["states"]],
                    "y": [s["top1"] for s in entry["states"]],
                }
                for entry in merged["runs"]
            ],
        }
        plot_path = out_dir / "plot_data.json"
        with open(plot_path, "w") as fh:
            json.dump(plot, fh, indent=1, sort_keys=True)
            fh.write("\n")
        paths["plot"] = plot_path
    return paths

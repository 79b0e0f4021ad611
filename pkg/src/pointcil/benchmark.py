"""Ablation benchmark orchestration.

Runs the full model, the four single-ablation variants and naive
fine-tuning over a common synthetic dataset and seed set, in parallel
worker processes (single-threaded torch each; per-run results are
independent of worker count).
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .config import AblationFlags, ModelConfig, TrainConfig

VARIANTS = ("full", "no_cgr", "no_cga", "no_wfc", "no_sfc", "finetune")


def variant_config(base: TrainConfig, name: str, seed: int) -> TrainConfig:
    """Derive one variant's config from the base benchmark config."""
    flags = AblationFlags()
    budget = base.exemplar_budget
    if name == "no_cgr":
        flags.cgr = False
    elif name == "no_cga":
        flags.cga = False
    elif name == "no_wfc":
        flags.wfc = False
    elif name == "no_sfc":
        flags.sfc = False
    elif name == "finetune":
        # same architecture, no anti-forgetting machinery
        flags.wfc = False
        flags.sfc = False
        budget = 0
    elif name != "full":
        raise ValueError(f"unknown variant {name!r}")
    return dataclasses.replace(base, ablations=flags, exemplar_budget=budget, seed=seed)


def old_class_accuracy(report: dict, schedule: list[list[int]]) -> float:
    """Mean final-state accuracy over classes introduced before the last state."""
    last = report["states"][-1]
    old = [c for group in schedule[:-1] for c in group]
    return float(np.mean([last["per_class"][str(c)] for c in old]))


def run_single(
    manifest_path: str,
    config_dict: dict,
    model_config_dict: dict,
    run_id: str,
    out_dir: str | None = None,
    num_threads: int = 1,
) -> dict:
    """One complete experiment; importable so worker processes can run it."""
    import torch

    torch.set_num_threads(num_threads)
    from .data.manifest import load_manifest
    from .training.trainer import run_incremental

    cfg = TrainConfig.from_dict(config_dict)
    mcfg = ModelConfig.from_dict(model_config_dict)
    manifest = load_manifest(manifest_path)
    return run_incremental(manifest, cfg, mcfg, out_dir=out_dir, run_id=run_id)


def run_ablation_suite(
    manifest_path: str | Path,
    base_config: TrainConfig,
    model_config: ModelConfig,
    seeds: list[int],
    max_workers: int = 2,
    out_root: str | Path | None = None,
    variants: tuple[str, ...] = VARIANTS,
) -> dict[str, list[dict]]:
    """Run every variant for every seed; returns variant -> list of reports."""
    jobs = []
    for name in variants:
        for seed in seeds:
            cfg = variant_config(base_config, name, seed)
            run_id = f"{name}-seed{seed}"
            out_dir = str(Path(out_root) / run_id) if out_root is not None else None
            jobs.append((name, seed, cfg, run_id, out_dir))
    results: dict[str, list[dict]] = {name: [] for name in variants}
    ctx = get_context("spawn")
    with ProcessPoolExecutor(max_workers=max_workers, mp_context=ctx) as pool:
        futures = [
            pool.submit(
                run_single,
                str(manifest_path),
                cfg.to_dict(),
                model_config.to_dict(),
                run_id,
                out_dir,
            )
            for (_, _, cfg, run_id, out_dir) in jobs
        ]
        for (name, seed, _, _, _), fut in zip(jobs, futures):
            report = fut.result()
            report["variant"] = name
            results[name].append(report)
    return results


def summarize(results: dict[str, list[dict]], schedule: list[list[int]]) -> dict[str, dict]:
    """Per-variant mean average accuracy and final old-class accuracy."""
    summary = {}
    for name, reports in results.items():
        summary[name] = {
            "mean_avg_top1": float(np.mean([r["avg_top1"] for r in reports])),
            "mean_old_class_acc": float(
                np.mean([old_class_accuracy(r, schedule) for r in reports])
            ),
            "avg_top1_per_seed": [r["avg_top1"] for r in reports],
        }
    return summary

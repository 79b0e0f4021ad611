"""Command-line surface: generate-data, train, eval, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ModelConfig, TrainConfig
from .data.manifest import load_manifest, load_split
from .data.synthetic import SHAPE_GENERATORS, generate_synthetic_dataset
from .metrics import emit_report
from .training.trainer import IncrementalTrainer, run_incremental


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointcil",
        description="Class-incremental 3D point-cloud recognition experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-data", help="write a synthetic shape dataset")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument(
        "--shapes",
        nargs="+",
        default=["sphere", "cube", "cylinder", "cone", "torus", "table", "chair", "capsule"],
        choices=sorted(SHAPE_GENERATORS),
    )
    gen.add_argument("--train-per-class", type=int, default=100)
    gen.add_argument("--test-per-class", type=int, default=30)
    gen.add_argument("--num-points", type=int, default=256)
    gen.add_argument("--noise", type=float, default=0.01)
    gen.add_argument("--seed", type=int, default=0)

    train = sub.add_parser("train", help="run the incremental experiment")
    train.add_argument("--config", required=True, help="train config JSON (pinned schema)")
    train.add_argument("--out", required=True, help="run output directory")
    train.add_argument("--model", default="paper", help="model preset name (paper|desk)")
    train.add_argument("--model-config", default=None, help="model config JSON (overrides --model)")
    train.add_argument("--run-id", default=None, help="run identifier (default: out dir name)")

    ev = sub.add_parser("eval", help="score a checkpoint on a split")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--manifest", default=None, help="defaults to the checkpoint's manifest")
    ev.add_argument("--split", default="test", choices=["train", "test"])
    ev.add_argument("--no-sfc", action="store_true", help="disable score rectification")
    ev.add_argument("--out", default=None, help="metrics JSON path (default: stdout)")

    rep = sub.add_parser("report", help="merge run metrics into a comparison report")
    rep.add_argument("--runs", nargs="+", required=True, help="run directories with metrics.json")
    rep.add_argument("--ref", default=None, help="reference run id for delta columns")
    rep.add_argument("--out", required=True, help="report output directory")
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    spec = [
        (kind, {"train": args.train_per_class, "test": args.test_per_class})
        for kind in args.shapes
    ]
    manifest = generate_synthetic_dataset(
        args.out, spec, num_points=args.num_points, noise_sigma=args.noise, seed=args.seed
    )
    print(f"wrote {len(manifest.samples)} samples, {manifest.num_classes} classes -> {args.out}")
    return 0


def _load_model_config(args: argparse.Namespace) -> ModelConfig:
    if args.model_config:
        return ModelConfig.from_dict(json.loads(Path(args.model_config).read_text()))
    return ModelConfig.preset(args.model)


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig.from_json(args.config)
    dataset = cfg.dataset
    if "manifest" not in dataset:
        raise ConfigError("config dataset must contain a 'manifest' path")
    manifest_path = Path(dataset["manifest"])
    if not manifest_path.is_absolute():
        manifest_path = Path(args.config).parent / manifest_path
    manifest = load_manifest(manifest_path)
    run_id = args.run_id or Path(args.out).name
    report = run_incremental(
        manifest, cfg, _load_model_config(args), out_dir=args.out, run_id=run_id
    )
    print(f"avg top-1 {report['avg_top1']:.4f} over {len(report['states'])} states -> {args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    trainer = IncrementalTrainer.from_checkpoint(args.checkpoint)
    manifest_path = args.manifest or trainer.manifest_path
    if manifest_path is None:
        raise ConfigError("checkpoint has no manifest path; pass --manifest")
    manifest = load_manifest(manifest_path)
    data = load_split(manifest, args.split, trainer.cfg.num_points)
    seen = data.subset(np.isin(data.labels, trainer.class_order))
    if args.no_sfc:
        trainer.cfg.ablations.sfc = False
    train_data = load_split(manifest, "train", trainer.cfg.num_points)
    state = trainer.loaded_state
    metrics = trainer.evaluate(seen, state, seed_source=train_data)
    payload = {
        "checkpoint": str(args.checkpoint),
        "split": args.split,
        "state": state,
        "sfc": bool(trainer.cfg.ablations.sfc),
        "top1": metrics["top1"],
        "macro_f1": metrics["macro_f1"],
        "macro_recall": metrics["macro_recall"],
        "per_class": {str(k): v for k, v in sorted(metrics["per_class"].items())},
    }
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    reports = []
    for run_dir in args.runs:
        path = Path(run_dir) / "metrics.json"
        if not path.is_file():
            raise FileNotFoundError(f"no metrics.json under {run_dir}")
        reports.append(json.loads(path.read_text()))
    paths = emit_report(reports, args.out, reference=args.ref)
    print(f"report -> {paths['json']}")
    return 0


_COMMANDS = {
    "generate-data": _cmd_generate,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # runtime failures exit 1, usage errors exit 2 via argparse
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Class-incremental training loop.

Per state: grow the classifier, train on new data plus exemplar replay with
the three-group update (backbone / attention / critic, one shared forward
pass, gradients evaluated at batch-start parameters), maintain class
prototypes, apply weight fairness compensation, record score statistics,
rebalance the herding exemplar store, then evaluate over all seen classes.

A trainer instance mutates parameters and running statistics and is not
safe for concurrent use; run distinct configurations in distinct processes
(see pointcil.benchmark). All randomness derives from the config seed, so
results are independent of how runs are scheduled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from ..config import ModelConfig, TrainConfig
from ..data.manifest import ArrayDataset, DatasetManifest, load_split
from ..data.transforms import augment
from ..fairness import (
    ScoreStats,
    record_score_statistics,
    score_fairness_compensation,
    weight_fairness_compensation,
)
from ..herding import ExemplarStore
from ..metrics import macro_f1, macro_recall, per_class_accuracy, top1_accuracy
from ..models.critic import compute_rewards, critic_loss, regression_loss
from ..models.network import RecognitionNetwork, build_network
from ..models.reasoning import (
    PrototypeBank,
    batch_prototypes,
    consistency_loss,
    ema_update_prototypes,
)

CHECKPOINT_VERSION = 1
AUG_ROTATE = True
AUG_SIGMA = 0.01
AUG_CLIP = 0.05


def classification_loss(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean cross-entropy; softmax applied internally."""
    if labels.max() >= logits.shape[-1] or labels.min() < 0:
        raise ValueError("label index out of range")
    return F.cross_entropy(logits, labels)


def total_objective(
    l_clc: float, l_reg: float, l_cri: float, l_cst: float, config: TrainConfig
) -> float:
    """Diagnostic combined objective (optimization uses the per-group split)."""
    return l_clc + l_reg + config.lambda1 * l_cri + config.lambda2 * l_cst


def epoch_plan(seed: int, state: int, epoch: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-epoch sample order and augmentation seeds."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, state, epoch])
    rng = np.random.default_rng(ss)
    order = rng.permutation(n)
    aug_seeds = rng.integers(0, 2**63, size=n)
    return order, aug_seeds


def _concat(a: ArrayDataset, b: ArrayDataset) -> ArrayDataset:
    return ArrayDataset(
        np.concatenate([a.points, b.points], axis=0),
        np.concatenate([a.labels, b.labels], axis=0),
        a.ids + b.ids,
    )


@dataclass
class BatchRecord:
    clc: float
    cst: float
    cri: float
    reg: float


@dataclass
class StateResult:
    state: int
    classes: list[int]
    top1: float
    macro_f1: float
    macro_recall: float
    per_class: dict[int, float]
    epoch_losses: list[dict] = field(default_factory=list)


class IncrementalTrainer:
    """Drives the full multi-state experiment for one (config, seed)."""

    def __init__(
        self,
        config: TrainConfig,
        model_config: ModelConfig | None = None,
        out_dir: str | Path | None = None,
        run_id: str = "run",
    ):
        self.cfg = config
        self.mcfg = model_config or ModelConfig.paper()
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.run_id = run_id
        self.model: RecognitionNetwork | None = None
        self.bank = PrototypeBank(config.gamma)
        self.stats = ScoreStats()
        self.store = ExemplarStore(config.exemplar_budget) if config.exemplar_budget > 0 else None
        self.class_order: list[int] = []
        self.manifest_path: str | None = None

    # -- helpers ---------------------------------------------------------

    def _columns(self, labels: np.ndarray) -> torch.Tensor:
        col_of = {k: i for i, k in enumerate(self.class_order)}
        return torch.tensor([col_of[int(k)] for k in labels], dtype=torch.long)

    def _forward_flags(self) -> dict:
        return {
            "use_reasoning": self.cfg.ablations.cgr,
            "use_attention": self.cfg.ablations.cga,
        }

    def predict_proba(self, points: np.ndarray) -> np.ndarray:
        """Eval-mode class probabilities (columns in introduction order)."""
        assert self.model is not None
        self.model.eval()
        probs = []
        with torch.no_grad():
            for i in range(0, points.shape[0], self.cfg.batch_size):
                batch = torch.from_numpy(points[i : i + self.cfg.batch_size]).to(self.model.dtype)
                bundle = self.model(batch, **self._forward_flags())
                probs.append(F.softmax(bundle.logits, dim=-1).cpu().numpy())
        self.model.train()
        return np.concatenate(probs, axis=0)

    def global_features(self, points: np.ndarray) -> np.ndarray:
        """Eval-mode post-attention global features (herding input)."""
        assert self.model is not None
        self.model.eval()
        feats = []
        with torch.no_grad():
            for i in range(0, points.shape[0], self.cfg.batch_size):
                batch = torch.from_numpy(points[i : i + self.cfg.batch_size]).to(self.model.dtype)
                bundle = self.model(batch, **self._forward_flags())
                feats.append(bundle.f_g.cpu().numpy())
        self.model.train()
        return np.concatenate(feats, axis=0)

    # -- per-batch update --------------------------------------------------

    def train_batch(
        self,
        points: np.ndarray,
        labels: np.ndarray,
        optimizers: dict[str, torch.optim.Optimizer],
        groups: dict[str, list[torch.nn.Parameter]],
        state: int,
    ) -> BatchRecord:
        """One shared forward pass, three gradient evaluations at batch-start
        parameters, optimizer steps in fixed group order."""
        cfg = self.cfg
        model = self.model
        assert model is not None
        pts = torch.from_numpy(points).to(model.dtype)
        cols = self._columns(labels)
        bundle = model(pts, **self._forward_flags())

        if cfg.ablations.cgr:
            estimates = batch_prototypes(bundle.f_g.detach().cpu().numpy(), labels)
            ema_update_prototypes(self.bank, estimates, state)
            proto_matrix, proto_classes = self.bank.stacked(model.dtype)
            l_cst = consistency_loss(
                bundle.f_m,
                labels,
                proto_matrix,
                proto_classes,
                model.embed,
                cfg.tau,
                centered=self.mcfg.centered_embed_norm,
            )
        else:
            l_cst = torch.zeros((), dtype=model.dtype)

        l_clc = classification_loss(bundle.logits, cols)

        if cfg.ablations.cga:
            gains = model.critic(bundle.f_p, bundle.attention)
            l_cri = critic_loss(gains)
            with torch.no_grad():
                probs_with = F.softmax(bundle.logits, dim=-1).cpu().numpy()
                probs_without = F.softmax(model.classifier(bundle.f_g_plain), dim=-1).cpu().numpy()
            rewards = compute_rewards(probs_with, probs_without, cols.numpy())
            gains_det = model.critic(bundle.f_p, bundle.attention, detach_inputs=True)
            l_reg = regression_loss(gains_det, torch.from_numpy(rewards).to(model.dtype))
        else:
            l_cri = torch.zeros((), dtype=model.dtype)
            l_reg = torch.zeros((), dtype=model.dtype)

        record = BatchRecord(
            clc=float(l_clc.detach()),
            cst=float(l_cst.detach()),
            cri=float(l_cri.detach()),
            reg=float(l_reg.detach()),
        )
        if not np.isfinite([record.clc, record.cst, record.cri, record.reg]).all():
            raise RuntimeError(f"non-finite loss in state {state}: {record}")

        loss_backbone = l_clc + cfg.lambda2 * l_cst
        grads = {
            "backbone": torch.autograd.grad(
                loss_backbone, groups["backbone"], retain_graph=True, allow_unused=True
            )
        }
        if cfg.ablations.cga:
            loss_attention = l_clc + cfg.lambda1 * l_cri + cfg.lambda2 * l_cst
            grads["attention"] = torch.autograd.grad(
                loss_attention, groups["attention"], retain_graph=True, allow_unused=True
            )
            grads["critic"] = torch.autograd.grad(l_reg, groups["critic"], allow_unused=True)
        for name in ("backbone", "attention", "critic"):
            if name not in grads:
                continue
            for p, g in zip(groups[name], grads[name]):
                p.grad = g
            optimizers[name].step()
            optimizers[name].zero_grad(set_to_none=True)
        return record

    # -- per-state training --------------------------------------------------

    def fit_state(
        self,
        state: int,
        new_classes: list[int],
        state_data: ArrayDataset,
        replay_source: ArrayDataset | None = None,
    ) -> list[dict]:
        """Train one incremental state on new-class data plus replayed
        exemplars; record statistics and rebalance the store afterwards."""
        cfg = self.cfg
        num_old = len(self.class_order)
        num_new = len(new_classes)
        if num_new < 1:
            raise ValueError("a state must introduce at least one class")
        if set(new_classes) & set(self.class_order):
            raise ValueError("new classes overlap previously seen classes")

        if self.model is None:
            self.model = build_network(
                self.mcfg, cfg.num_structures, cfg.num_neighbors, num_new, cfg.seed
            )
        else:
            gen = torch.Generator().manual_seed((cfg.seed & 0xFFFFFFFF) * 1000 + state)
            self.model.grow_classifier(num_new, gen)
        self.class_order.extend(new_classes)

        if self.store is not None and num_old > 0:
            if replay_source is None:
                raise ValueError("exemplar replay requires a replay source dataset")
            merged = _concat(state_data, replay_source.select_ids(self.store.all_ids()))
        else:
            merged = state_data

        groups = self.model.parameter_groups()
        optimizers = {
            name: torch.optim.Adam(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
            for name, params in groups.items()
        }

        epoch_losses: list[dict] = []
        for epoch in range(1, cfg.epochs + 1):
            order, aug_seeds = epoch_plan(cfg.seed, state, epoch, len(merged))
            records: list[BatchRecord] = []
            for start in range(0, len(merged), cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                pts = np.stack(
                    [
                        augment(
                            merged.points[i],
                            int(aug_seeds[i]),
                            rotate_z=AUG_ROTATE,
                            jitter_sigma=AUG_SIGMA,
                            jitter_clip=AUG_CLIP,
                        )
                        for i in idx
                    ]
                )
                records.append(
                    self.train_batch(pts, merged.labels[idx], optimizers, groups, state)
                )
            if cfg.ablations.wfc and num_old >= 1:
                weight_fairness_compensation(self.model.classifier, num_old, num_new)
            epoch_losses.append(
                {
                    "clc": float(np.mean([r.clc for r in records])),
                    "cst": float(np.mean([r.cst for r in records])),
                    "cri": float(np.mean([r.cri for r in records])),
                    "reg": float(np.mean([r.reg for r in records])),
                    "obj": float(
                        np.mean(
                            [total_objective(r.clc, r.reg, r.cri, r.cst, cfg) for r in records]
                        )
                    ),
                }
            )
        if cfg.ablations.wfc and num_old >= 1:
            weight_fairness_compensation(self.model.classifier, num_old, num_new)

        # end-of-state statistics over the state's full training data
        probs_train = self.predict_proba(merged.points)
        record_score_statistics(
            self.stats, state, probs_train, merged.labels, self.class_order, set(new_classes)
        )

        if self.store is not None:
            class_feats = {}
            for k in new_classes:
                cls = state_data.subset(state_data.labels == k)
                class_feats[k] = (self.global_features(cls.points), cls.ids)
            self.store.rebalance(self.class_order, class_feats)
        return epoch_losses

    # -- prediction / evaluation ----------------------------------------------

    def predict_labels(
        self, points: np.ndarray, state: int, seed_source: ArrayDataset | None = None
    ) -> np.ndarray:
        """Predicted class indices with score rectification when enabled."""
        cfg = self.cfg
        probs = self.predict_proba(points)
        col_class = np.asarray(self.class_order)
        use_sfc = cfg.ablations.sfc and state >= 2
        if not use_sfc:
            return col_class[np.argmax(probs, axis=1)]
        current_new = set(cfg.schedule[state - 1]) if cfg.schedule else set()
        self._seed_running_stats(state, current_new, seed_source)
        preds = np.empty(points.shape[0], dtype=np.int64)
        for i, row in enumerate(probs):
            top = int(np.argmax(row))
            self.stats.update_running(int(col_class[top]), float(row[top]))
            rect = score_fairness_compensation(
                row, self.stats, state, current_new, self.class_order
            )
            preds[i] = col_class[int(np.argmax(rect))]
        return preds

    def evaluate(
        self, data: ArrayDataset, state: int, seed_source: ArrayDataset | None = None
    ) -> dict:
        preds = self.predict_labels(data.points, state, seed_source)
        return {
            "top1": top1_accuracy(preds, data.labels),
            "macro_f1": macro_f1(preds, data.labels, max(self.class_order) + 1),
            "macro_recall": macro_recall(preds, data.labels, max(self.class_order) + 1),
            "per_class": per_class_accuracy(preds, data.labels),
        }

    def _seed_running_stats(
        self, state: int, current_new: set[int], seed_source: ArrayDataset | None
    ) -> None:
        """Initialize the per-evaluation psi_s(k) means for past classes:
        exemplar predictions when a store exists, recorded initial values
        otherwise."""
        self.stats.reset_running()
        past = [k for k in self.class_order if k not in current_new]
        if self.store is not None and seed_source is not None and self.store.total() > 0:
            ex = seed_source.select_ids(self.store.all_ids())
            ex_probs = self.predict_proba(ex.points)
            top_scores = ex_probs.max(axis=1)
            pred_classes = np.asarray(self.class_order)[ex_probs.argmax(axis=1)]
            for k in past:
                mask = pred_classes == k
                if not mask.any():
                    mask = ex.labels == k
                if mask.any():
                    self.stats.seed_running(k, float(top_scores[mask].mean()), int(mask.sum()))
                else:
                    self.stats.seed_running(k, self.stats.psi_init[k], 1)
        else:
            for k in past:
                self.stats.seed_running(k, self.stats.psi_init[k], 1)

    # -- full manifest-driven run ------------------------------------------------

    def run_state(
        self, state: int, train_data: ArrayDataset, test_data: ArrayDataset
    ) -> StateResult:
        new_classes = list(self.cfg.schedule[state - 1])
        state_data = train_data.subset(np.isin(train_data.labels, new_classes))
        epoch_losses = self.fit_state(state, new_classes, state_data, replay_source=train_data)
        seen = test_data.subset(np.isin(test_data.labels, self.class_order))
        metrics = self.evaluate(seen, state, seed_source=train_data)
        result = StateResult(
            state=state,
            classes=list(new_classes),
            top1=metrics["top1"],
            macro_f1=metrics["macro_f1"],
            macro_recall=metrics["macro_recall"],
            per_class=metrics["per_class"],
            epoch_losses=epoch_losses,
        )
        if self.out_dir is not None:
            self.save_checkpoint(self.out_dir / f"state_{state}.ckpt", state)
            self.stats.save_json(self.out_dir / f"state_{state}_scores.json")
        return result

    def run(self, manifest: DatasetManifest) -> dict:
        cfg = self.cfg
        cfg.validate_schedule(manifest.num_classes)
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path = str((manifest.root / "manifest.json").resolve())
        train_data = load_split(manifest, "train", cfg.num_points)
        test_data = load_split(manifest, "test", cfg.num_points)
        results = [
            self.run_state(s, train_data, test_data) for s in range(1, len(cfg.schedule) + 1)
        ]
        report = {
            "run_id": self.run_id,
            "seed": cfg.seed,
            "states": [
                {
                    "s": r.state,
                    "top1": r.top1,
                    "macro_f1": r.macro_f1,
                    "macro_recall": r.macro_recall,
                    "per_class": {str(k): v for k, v in sorted(r.per_class.items())},
                }
                for r in results
            ],
            "avg_top1": float(np.mean([r.top1 for r in results])),
        }
        self.epoch_losses = [r.epoch_losses for r in results]
        if self.out_dir is not None:
            write_metrics_files(report, self.out_dir)
        return report

    # -- checkpointing ---------------------------------------------------------

    def save_checkpoint(self, path: str | Path, state: int) -> None:
        assert self.model is not None
        payload = {
            "format_version": CHECKPOINT_VERSION,
            "state_index": state,
            "config": self.cfg.to_dict(),
            "config_hash": self.cfg.content_hash(),
            "model_config": self.mcfg.to_dict(),
            "class_order": list(self.class_order),
            "model_state": self.model.state_dict(),
            "prototype_bank": self.bank.to_dict(),
            "score_stats": self.stats.to_dict(),
            "exemplars": self.store.to_dict() if self.store is not None else {},
            "manifest_path": self.manifest_path,
        }
        torch.save(payload, path)

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "IncrementalTrainer":
        payload = torch.load(path, weights_only=False)
        if payload.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version in {path}")
        cfg = TrainConfig.from_dict(payload["config"])
        mcfg = ModelConfig.from_dict(payload["model_config"])
        trainer = cls(cfg, mcfg)
        trainer.class_order = list(payload["class_order"])
        trainer.model = build_network(
            mcfg, cfg.num_structures, cfg.num_neighbors, len(trainer.class_order), cfg.seed
        )
        trainer.model.load_state_dict(payload["model_state"])
        trainer.bank = PrototypeBank.from_dict(payload["prototype_bank"])
        trainer.stats = ScoreStats.from_dict(payload["score_stats"])
        if cfg.exemplar_budget > 0:
            trainer.store = ExemplarStore.from_dict(cfg.exemplar_budget, payload["exemplars"])
        trainer.manifest_path = payload.get("manifest_path")
        trainer.loaded_state = int(payload["state_index"])
        return trainer


def write_metrics_files(report: dict, out_dir: str | Path) -> tuple[Path, Path]:
    """Emit the canonical metrics JSON and CSV (byte-deterministic)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "metrics.json"
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
    csv_path = out_dir / "metrics.csv"
    lines = ["state,top1,macro_f1,macro_recall"]
    for s in report["states"]:
        lines.append(f"{s['s']},{s['top1']!r},{s['macro_f1']!r},{s['macro_recall']!r}")
    lines.append(f"avg,{report['avg_top1']!r},,")
    csv_path.write_text("\n".join(lines) + "\n")
    return json_path, csv_path


def run_incremental(
    manifest: DatasetManifest,
    config: TrainConfig,
    model_config: ModelConfig | None = None,
    out_dir: str | Path | None = None,
    run_id: str = "run",
) -> dict:
    """Convenience wrapper: one full experiment, returns the metrics report."""
    trainer = IncrementalTrainer(config, model_config, out_dir=out_dir, run_id=run_id)
    return trainer.run(manifest)


def inference(
    trainer: IncrementalTrainer, points: np.ndarray, use_sfc: bool | None = None
) -> tuple[int, np.ndarray]:
    """Classify a single normalized cloud; returns (class, score vector).

    Scores are rectified when enabled; running statistics fall back to the
    recorded initial values when the caller has not seeded them.
    """
    cfg = trainer.cfg
    probs = trainer.predict_proba(points[None, :, :])[0]
    state = getattr(trainer, "loaded_state", len(cfg.schedule) or 1)
    if use_sfc is None:
        use_sfc = cfg.ablations.sfc
    if use_sfc and state >= 2:
        current_new = set(cfg.schedule[state - 1])
        for k in trainer.class_order:
            if k not in current_new and k not in trainer.stats.running:
                trainer.stats.seed_running(k, trainer.stats.psi_init[k], 1)
        probs = score_fairness_compensation(
            probs, trainer.stats, state, current_new, trainer.class_order
        )
    col = int(np.argmax(probs))
    return trainer.class_order[col], probs

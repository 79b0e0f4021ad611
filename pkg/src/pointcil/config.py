"""Run configuration: training hyperparameters and network widths.

TrainConfig round-trips the pinned JSON schema (keys exactly: lambda1,
lambda2, gamma, tau, L, m, U, batch_size, lr, weight_decay, epochs,
exemplar_budget, seed, ablations{cgr,cga,wfc,sfc}, schedule, dataset).
Network widths are a separate concern (ModelConfig) so the same schedule
can run at paper scale or desk scale.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

_CONFIG_KEYS = {
    "lambda1",
    "lambda2",
    "gamma",
    "tau",
    "L",
    "m",
    "U",
    "batch_size",
    "lr",
    "weight_decay",
    "epochs",
    "exemplar_budget",
    "seed",
    "ablations",
    "schedule",
    "dataset",
}
_ABLATION_KEYS = {"cgr", "cga", "wfc", "sfc"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass
class AblationFlags:
    cgr: bool = True  # category-guided geometric reasoning
    cga: bool = True  # critic-induced geometric attention
    wfc: bool = True  # weight fairness compensation
    sfc: bool = True  # score fairness compensation


@dataclass
class TrainConfig:
    lambda1: float = 0.01
    lambda2: float = 0.1
    gamma: float = 0.7
    tau: float = 64.0
    num_structures: int = 64  # L
    num_neighbors: int = 16  # m
    num_points: int = 1024  # U
    batch_size: int = 64
    lr: float = 0.001
    weight_decay: float = 0.0005
    epochs: int = 30
    exemplar_budget: int = 0
    seed: int = 0
    ablations: AblationFlags = field(default_factory=AblationFlags)
    schedule: list[list[int]] = field(default_factory=list)
    dataset: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigError("lambda1 and lambda2 must be >= 0")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must be in (0, 1)")
        if self.tau <= 0:
            raise ConfigError("tau must be > 0")

    def validate_schedule(self, num_classes: int) -> None:
        flat = [c for group in self.schedule for c in group]
        if sorted(flat) != list(range(num_classes)):
            raise ConfigError(
                "schedule groups must disjointly cover all class indices "
                f"0..{num_classes - 1}, got {self.schedule}"
            )
        if self.exemplar_budget > 0 and len(self.schedule) >= 2:
            old_after_first = sum(len(g) for g in self.schedule[:-1])
            if self.exemplar_budget < old_after_first:
                raise ConfigError(
                    f"exemplar budget {self.exemplar_budget} smaller than the "
                    f"{old_after_first} old classes it must cover"
                )

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "gamma": self.gamma,
            "tau": self.tau,
            "L": self.num_structures,
            "m": self.num_neighbors,
            "U": self.num_points,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "weight_decay": self.weight_decay,
            "epochs": self.epochs,
            "exemplar_budget": self.exemplar_budget,
            "seed": self.seed,
            "ablations": asdict(self.ablations),
            "schedule": [list(g) for g in self.schedule],
            "dataset": dict(self.dataset),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        keys = set(doc)
        if keys != _CONFIG_KEYS:
            missing = _CONFIG_KEYS - keys
            extra = keys - _CONFIG_KEYS
            raise ConfigError(f"config keys mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        abl = doc["ablations"]
        if set(abl) != _ABLATION_KEYS:
            raise ConfigError(f"ablations keys must be exactly {sorted(_ABLATION_KEYS)}")
        return cls(
            lambda1=float(doc["lambda1"]),
            lambda2=float(doc["lambda2"]),
            gamma=float(doc["gamma"]),
            tau=float(doc["tau"]),
            num_structures=int(doc["L"]),
            num_neighbors=int(doc["m"]),
            num_points=int(doc["U"]),
            batch_size=int(doc["batch_size"]),
            lr=float(doc["lr"]),
            weight_decay=float(doc["weight_decay"]),
            epochs=int(doc["epochs"]),
            exemplar_budget=int(doc["exemplar_budget"]),
            seed=int(doc["seed"]),
            ablations=AblationFlags(**{k: bool(v) for k, v in abl.items()}),
            schedule=[list(map(int, g)) for g in doc["schedule"]],
            dataset=dict(doc["dataset"]),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "TrainConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def save_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


@dataclass
class ModelConfig:
    """Network widths. `paper` mirrors the published architecture table;
    `desk` is a scaled-down preset for CPU-sized experiments."""

    point_feat_dim: int = 512  # d_p
    struct_feat_dim: int = 1024  # d_s
    embed_dim: int = 256  # d_c
    attention_ratio: int = 4
    encoder_channels: tuple[int, int] = (64, 128)
    tnet_channels: tuple[int, int, int] = (64, 128, 1024)
    tnet_hidden: tuple[int, ...] = (512, 256)
    classifier_hidden: tuple[int, ...] = (512, 256)
    critic_channels: int = 256
    critic_state_fc: tuple[int, int] = (256, 64)
    critic_policy_fc: int = 64
    dtype: str = "float32"
    centered_embed_norm: bool = False

    @classmethod
    def paper(cls, **overrides) -> "ModelConfig":
        return cls(**overrides)

    @classmethod
    def desk(cls, **overrides) -> "ModelConfig":
        base = dict(
            point_feat_dim=64,
            struct_feat_dim=128,
            # embedding width stays at the published value: the tau=64
            # re-scaling assumes the similarity variance of a 256-wide space
            embed_dim=256,
            attention_ratio=4,
            encoder_channels=(32, 64),
            tnet_channels=(16, 32, 64),
            tnet_hidden=(32, 16),
            classifier_hidden=(64, 32),
            critic_channels=32,
            critic_state_fc=(32, 16),
            critic_policy_fc=16,
        )
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelConfig":
        doc = dict(doc)
        for k in ("encoder_channels", "tnet_channels", "tnet_hidden", "classifier_hidden", "critic_state_fc"):
            if k in doc:
                doc[k] = tuple(doc[k])
        return cls(**doc)

    @classmethod
    def preset(cls, name: str, **overrides) -> "ModelConfig":
        if name == "paper":
            return cls.paper(**overrides)
        if name == "desk":
            return cls.desk(**overrides)
        raise ConfigError(f"unknown model preset {name!r}")

from .attention import GeometricAttention, global_pool
from .classifier import ClassifierHead
from .critic import (
    CriticNetwork,
    amelioration_reward,
    classification_reward,
    compute_rewards,
    critic_loss,
    regression_loss,
)
from .encoder import PointEncoder, TNet
from .network import ForwardBundle, RecognitionNetwork, build_network
from .reasoning import (
    ConsistencyEmbed,
    GeometricReasoning,
    LocalStructures,
    PrototypeBank,
    batch_prototypes,
    build_structures,
    consistency_loss,
    ema_update_prototypes,
    normalize_embed,
    predict_offsets,
    structure_features,
    update_structures,
)

__all__ = [
    "ClassifierHead",
    "ConsistencyEmbed",
    "CriticNetwork",
    "ForwardBundle",
    "GeometricAttention",
    "GeometricReasoning",
    "LocalStructures",
    "PointEncoder",
    "PrototypeBank",
    "RecognitionNetwork",
    "TNet",
    "amelioration_reward",
    "batch_prototypes",
    "build_network",
    "build_structures",
    "classification_reward",
    "compute_rewards",
    "consistency_loss",
    "critic_loss",
    "ema_update_prototypes",
    "global_pool",
    "normalize_embed",
    "predict_offsets",
    "regression_loss",
    "structure_features",
    "update_structures",
]

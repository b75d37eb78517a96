from .ppo import (
    Minibatch,
    PPOLearner,
    TrainConfig,
    TrainResult,
    UpdateStats,
    network_config_for,
    ppo_loss,
    resolve_gamma,
    scalarize_advantages,
    train,
    write_log,
)
from .rollout import AlgorithmVariant, RolloutBuffer, RolloutCollector, gae, vector_gae

__all__ = [
    "AlgorithmVariant",
    "Minibatch",
    "PPOLearner",
    "RolloutBuffer",
    "RolloutCollector",
    "TrainConfig",
    "TrainResult",
    "UpdateStats",
    "gae",
    "network_config_for",
    "ppo_loss",
    "resolve_gamma",
    "scalarize_advantages",
    "train",
    "vector_gae",
    "write_log",
]

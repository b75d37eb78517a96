from .autodiff import Tensor, backward
from .checkpoint import PolicyCheckpoint
from .network import (
    NetworkConfig,
    NetworkParams,
    PolicyNetwork,
    PolicyOutput,
    init_params,
    log_prob_entropy,
    log_softmax,
    sample_actions,
)
from .optim import AdamState, adam_step, clip_grad_norm

__all__ = [
    "AdamState",
    "NetworkConfig",
    "NetworkParams",
    "PolicyCheckpoint",
    "PolicyNetwork",
    "PolicyOutput",
    "Tensor",
    "adam_step",
    "backward",
    "clip_grad_norm",
    "init_params",
    "log_prob_entropy",
    "log_softmax",
    "sample_actions",
]

"""Shared fixtures-by-function for the unit and acceptance tests."""

import numpy as np
from oracles import finite_difference

from morl_control.core import RngStream
from morl_control.moppo import Minibatch, TrainConfig, ppo_loss
from morl_control.nn import NetworkConfig, PolicyNetwork


def small_network(seed: int, conditioned: bool = True, activation: str = "tanh") -> PolicyNetwork:
    """Input 6, hidden (8, 8), 3 actions, D=3, with every parameter randomized."""
    cfg = NetworkConfig(6, 3, 3, (8, 8), activation, condition_on_weights=conditioned)
    net = PolicyNetwork(cfg, rng=RngStream(seed))
    net.params.flat[:] += np.random.default_rng(seed).normal(scale=0.3, size=net.params.flat.size)
    return net


def random_minibatch(net: PolicyNetwork, g: np.random.Generator, size: int = 8) -> Minibatch:
    """A batch whose ratios sit well away from the clip boundaries.

    Half the samples have ratios near 1, the rest far outside
    [1 - eps, 1 + eps], so both branches of the surrogate are exercised
    without finite differences straddling a kink.
    """
    obs = g.normal(size=(size, 6))
    weights = g.dirichlet(np.ones(3), size)
    actions = g.integers(0, 3, size)
    logits = net.forward(obs, weights if net.config.condition_on_weights else None).action_logits
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    offsets = g.choice([-0.6, -0.05, 0.05, 0.6], size)
    return Minibatch(
        obs=obs,
        actions=actions,
        logprobs=logp[np.arange(size), actions] + offsets,
        advantages=g.normal(size=(size, 3)),
        targets=g.normal(size=(size, 3)),
        weights=weights,
    )


def ppo_gradient_error(seed: int, h: float = 1e-4, activation: str = "tanh") -> float:
    """Worst per-coordinate relative error between analytic and numeric PPO loss gradients."""
    net = small_network(seed, activation=activation)
    g = np.random.default_rng(seed + 1)
    batch = random_minibatch(net, g)
    cfg = TrainConfig()
    loss, _ = ppo_loss(net, batch, cfg, conditioned=True)
    analytic = net.gradient(loss)
    numeric = finite_difference(lambda: float(ppo_loss(net, batch, cfg, True)[0].data), net.params.flat, h)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / scale))


def episodic_buffer(g, T, N, D, truncation=False):
    """Random flags with every slot's final step ending its episode."""
    term = g.random((T, N)) < 0.2
    trunc = np.zeros((T, N), dtype=bool)
    if truncation:
        trunc = (g.random((T, N)) < 0.1) & ~term
    term[-1] = ~trunc[-1]
    rewards = g.normal(size=(T, N, D))
    values = g.normal(size=(T, N, D))
    next_values = g.normal(size=(T, N, D))
    return rewards, values, next_values, term, trunc

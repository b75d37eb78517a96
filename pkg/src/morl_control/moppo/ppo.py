"""Clipped-surrogate update with weight-scalarized advantages, and the training loop."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..core import RngStream
from ..envs import DISCOUNTS, ScalarRewardView, VectorEnv, make_env
from ..nn import AdamState, NetworkConfig, PolicyCheckpoint, PolicyNetwork, adam_step, clip_grad_norm
from ..nn import autodiff as ad
from .rollout import AlgorithmVariant, RolloutBuffer, RolloutCollector, vector_gae

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    total_steps: int = 100_000
    num_envs: int = 16
    horizon: int = 64
    minibatch_count: int = 4
    epochs_per_update: int = 4
    clip_eps: float = 0.2
    gae_lambda: float = 0.95
    gamma: float | None = None
    ent_coef: float = 0.01
    vf_coef: float = 0.5
    learning_rate: float = 3e-4
    max_grad_norm: float = 0.5
    normalize_advantages: bool = True
    hidden_sizes: tuple[int, ...] = (128, 128)
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if not (0 < self.gae_lambda <= 1):
            raise ValueError("gae_lambda must lie in (0, 1]")
        if not (0 < self.clip_eps < 1):
            raise ValueError("clip_eps must lie in (0, 1)")
        if self.gamma is not None and not (0 <= self.gamma < 1):
            raise ValueError("gamma must lie in [0, 1)")
        if self.total_steps < 0 or self.num_envs < 1 or self.horizon < 1:
            raise ValueError("total_steps >= 0, num_envs >= 1 and horizon >= 1 required")
        if self.minibatch_count < 1 or self.epochs_per_update < 1:
            raise ValueError("minibatch_count and epochs_per_update must be >= 1")

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}


@dataclass
class Minibatch:
    obs: np.ndarray
    actions: np.ndarray
    logprobs: np.ndarray
    advantages: np.ndarray
    targets: np.ndarray
    weights: np.ndarray


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_frac: float
    approx_kl: float


def scalarize_advantages(advantages: np.ndarray, weights: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Contract per-objective advantages with their weights, then standardize."""
    a = np.sum(advantages * weights, axis=-1)
    if normalize and a.size > 1:
        a = (a - a.mean()) / (a.std() + 1e-8)
    return a


def ppo_loss(
    net: PolicyNetwork, batch: Minibatch, config: TrainConfig, conditioned: bool
) -> tuple[ad.Tensor, dict]:
    """Assemble the full differentiable loss for one minibatch."""
    logits, value = net.forward_graph(batch.obs, batch.weights if conditioned else None)
    logp_all = ad.log_softmax(logits)
    logp = ad.pick(logp_all, batch.actions)
    ratio = ad.exp(logp - batch.logprobs)
    adv = scalarize_advantages(batch.advantages, batch.weights, config.normalize_advantages)
    eps = config.clip_eps
    surrogate = ad.minimum(ratio * adv, ad.clip(ratio, 1 - eps, 1 + eps) * adv)
    policy_loss = -ad.mean(surrogate)
    err = ad.square(value - batch.targets)
    value_loss = ad.mean(ad.tsum(err * batch.weights, axis=1))
    entropy = ad.mean(-ad.tsum(ad.exp(logp_all) * logp_all, axis=1))
    total = policy_loss + config.vf_coef * value_loss - config.ent_coef * entropy
    r = ratio.data
    info = {
        "policy_loss": float(policy_loss.data),
        "value_loss": float(value_loss.data),
        "entropy": float(entropy.data),
        "clip_frac": float(np.mean(np.abs(r - 1) > eps)),
        "approx_kl": float(np.mean((r - 1) - np.log(r))),
    }
    return total, info


class PPOLearner:
    """Holds the network and optimizer state; applies updates from rollout buffers."""

    def __init__(self, net: PolicyNetwork, config: TrainConfig, variant: AlgorithmVariant, rng: RngStream):
        self.net = net
        self.config = config
        self.variant = variant
        self.rng = rng
        self.opt = AdamState.zeros(net.params.flat.size)

    def update(self, buffer: RolloutBuffer, gamma: float) -> UpdateStats:
        cfg = self.config
        adv, targets = vector_gae(buffer, gamma, cfg.gae_lambda)
        n = buffer.horizon * buffer.num_slots
        flat = {
            "obs": buffer.obs.reshape(n, -1),
            "actions": buffer.actions.reshape(n),
            "logprobs": buffer.logprobs.reshape(n),
            "advantages": adv.reshape(n, -1),
            "targets": targets.reshape(n, -1),
            "weights": buffer.weights.reshape(n, -1),
        }
        mb_size = max(1, n // cfg.minibatch_count)
        totals = np.zeros(5)
        count = 0
        for _ in range(cfg.epochs_per_update):
            perm = self.rng.generator.permutation(n)
            for start in range(0, n - mb_size + 1, mb_size):
                idx = perm[start : start + mb_size]
                batch = Minibatch(**{k: v[idx] for k, v in flat.items()})
                loss, info = ppo_loss(self.net, batch, cfg, self.variant.conditioned)
                if not np.isfinite(loss.data):
                    raise FloatingPointError(
                        "non-finite PPO loss: "
                        + ", ".join(f"{k}={v!r}" for k, v in info.items())
                        + f"; advantages in [{batch.advantages.min()}, {batch.advantages.max()}]"
                        + f", targets in [{batch.targets.min()}, {batch.targets.max()}]"
                    )
                grads = self.net.gradient(loss)
                grads, _ = clip_grad_norm(grads, cfg.max_grad_norm)
                self.net.params.flat[:], self.opt = adam_step(
                    self.net.params.flat, grads, self.opt, cfg.learning_rate
                )
                totals += [info[k] for k in ("policy_loss", "value_loss", "entropy", "clip_frac", "approx_kl")]
                count += 1
        return UpdateStats(*(totals / max(count, 1)))


def network_config_for(variant: AlgorithmVariant, env_spec, config: TrainConfig) -> NetworkConfig:
    return NetworkConfig(
        input_length=env_spec.observation_length,
        action_count=env_spec.action_count,
        value_dim=1 if variant.scalar else env_spec.objective_count,
        hidden_sizes=config.hidden_sizes,
        activation=config.activation,
        condition_on_weights=variant.conditioned,
    )


def resolve_gamma(env_name: str, config: TrainConfig) -> float:
    return config.gamma if config.gamma is not None else DISCOUNTS.get(env_name, 0.99)


@dataclass
class TrainResult:
    checkpoint: PolicyCheckpoint
    log: list[dict] = field(default_factory=list)
    episodes: list = field(default_factory=list)



def train(variant, env_name: str, config: TrainConfig, env_kwargs: dict | None = None) -> TrainResult:
    """Collect, estimate advantages and update until ``total_steps`` transitions are used.

    Per-objective episode returns (undiscounted and discounted with the
    training discount) are logged per update, for the scalar variant too.
    """
    variant = AlgorithmVariant.parse(variant)
    env_kwargs = dict(env_kwargs or {})
    gamma = resolve_gamma(env_name, config)
    envs = [make_env(env_name, **env_kwargs) for _ in range(config.num_envs)]
    vector_spec = envs[0].spec
    if variant.scalar:
        envs = [ScalarRewardView(e) for e in envs]
    venv = VectorEnv(envs, gamma=gamma)
    rng = RngStream(config.seed)
    net_config = network_config_for(variant, venv.spec, config)
    net = PolicyNetwork(net_config, rng=rng.spawn(1))
    metadata = {
        "variant": variant.value,
        "env": env_name,
        "env_kwargs": env_kwargs,
        "gamma": gamma,
        "objective_names": list(vector_spec.objective_names),
        "train_config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(config).items()},
        "env_steps": 0,
    }
    result = TrainResult(PolicyCheckpoint(net_config, net.params, metadata))
    if config.total_steps == 0:
        return result

    collector = RolloutCollector(venv, variant, rng.spawn(2))
    learner = PPOLearner(net, config, variant, rng.spawn(3))
    steps_per_update = config.horizon * venv.num_slots
    n_updates = max(1, config.total_steps // steps_per_update)
    env_steps = 0
    started = time.time()
    for update in range(1, n_updates + 1):
        buffer = collector.collect(net, config.horizon)
        env_steps += steps_per_update
        stats = learner.update(buffer, gamma)
        finished = [(e.undiscounted, e.discounted, e.length) for e in venv.pop_finished()]
        row = {"update": update, "env_steps": env_steps, **asdict(stats)}
        d = vector_spec.objective_count
        if finished:
            und = np.mean([f[0] for f in finished], axis=0)
            disc = np.mean([f[1] for f in finished], axis=0)
        else:
            und = disc = np.full(d, np.nan)
        for k in range(d):
            row[f"mean_return_{k}"] = float(und[k])
        for k in range(d):
            row[f"mean_disc_return_{k}"] = float(disc[k])
        row["episodes"] = len(finished)
        result.log.append(row)
        result.episodes.extend(finished)
        if update % 10 == 0 or update == n_updates:
            log.info(
                "update %d/%d steps=%d return=%s entropy=%.3f (%.1fs)",
                update, n_updates, env_steps, np.round(und, 3), stats.entropy, time.time() - started,
            )
    metadata["env_steps"] = env_steps
    result.checkpoint = PolicyCheckpoint(net_config, net.params, metadata)
    return result


def write_log(path, rows: list[dict]):
    if not rows:
        return
    keys = [k for k in rows[0] if k != "episodes"]
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=keys, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})

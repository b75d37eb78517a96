"""Lattice evaluation of trained policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import RngStream, simplex_lattice
from ..envs import VectorEnv, make_env
from ..metrics import SolutionSet, read_solution_sets, write_solution_sets
from ..nn import NetworkConfig, PolicyCheckpoint, PolicyNetwork, PolicyOutput, sample_actions


@dataclass
class EvalConfig:
    weight_point_target: int = 30
    episodes_per_point: int = 1
    batches: int | None = None
    gamma: float | None = None
    normalization_scope: str = "across-algorithms"
    hv_offset: float = 0.1
    significance_threshold: float = 0.001
    deterministic: bool = True
    eu_normalized: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.episodes_per_point < 1:
            raise ValueError("episodes_per_point must be >= 1")
        if self.hv_offset < 0:
            raise ValueError("hv_offset must be >= 0")
        if self.normalization_scope != "across-algorithms":
            raise ValueError("only across-algorithms normalization is supported")
        # batches and weight points are one axis
        if self.batches is not None:
            self.weight_point_target = self.batches


@dataclass
class EvaluationRecord:
    algorithm: str
    weights: np.ndarray
    returns: np.ndarray
    episode_counts: np.ndarray = field(default=None)
    conditioned: bool = False

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.returns = np.asarray(self.returns, dtype=np.float64)
        if self.episode_counts is None:
            self.episode_counts = np.ones(len(self.weights), dtype=np.int64)

    def solution_set(self) -> SolutionSet:
        return SolutionSet(self.algorithm, self.weights, self.returns)


def is_conditioned_name(algorithm: str) -> bool:
    """Algorithm ids look like ``variant`` or ``variant:tag``; only ``moppo`` is conditioned."""
    return algorithm.split(":", 1)[0] == "moppo"


def write_records(path, records: list[EvaluationRecord]):
    write_solution_sets(path, [r.solution_set() for r in records])


def read_records(*paths) -> list[EvaluationRecord]:
    out = []
    for p in paths:
        for s in read_solution_sets(p):
            out.append(EvaluationRecord(s.algorithm, s.weights, s.returns, conditioned=is_conditioned_name(s.algorithm)))
    return out


def _check_compatible(checkpoint: PolicyCheckpoint, env_spec):
    cfg = checkpoint.config
    problems = []
    if cfg.input_length != env_spec.observation_length:
        problems.append(f"observation length {cfg.input_length} vs {env_spec.observation_length}")
    if cfg.action_count != env_spec.action_count:
        problems.append(f"action count {cfg.action_count} vs {env_spec.action_count}")
    if cfg.value_dim not in (1, env_spec.objective_count):
        problems.append(f"value head {cfg.value_dim} vs {env_spec.objective_count} objectives")
    if problems:
        raise ValueError("checkpoint does not match environment: " + "; ".join(problems))


def policy_actions(net: PolicyNetwork, obs, weight, deterministic: bool, rng: RngStream) -> np.ndarray:
    w = None
    if net.config.condition_on_weights:
        w = np.broadcast_to(weight, (len(obs), len(weight)))
    logits = net.forward(obs, w).action_logits
    if deterministic:
        return np.argmax(logits, axis=1)
    return sample_actions(logits, rng)


def run_episodes(net, env_name, env_kwargs, weight, episodes, gamma, deterministic, seed):
    """Mean discounted return over the first ``episodes`` episodes of fresh slots."""
    probe = make_env(env_name, **env_kwargs)
    k = probe.spec.agents_per_instance
    n_inst = math.ceil(episodes / k)
    venv = VectorEnv([probe] + [make_env(env_name, **env_kwargs) for _ in range(n_inst - 1)], gamma=gamma)
    # the same streams for every weight point
    base = RngStream(seed, 0xE7A1)
    obs = venv.reset(base.spawn(0))
    act_rng = base.spawn(1)
    first: dict[int, np.ndarray] = {}
    while len(first) < min(episodes, venv.num_slots):
        actions = policy_actions(net, obs, weight, deterministic, act_rng)
        obs, *_ = venv.step(actions)
        for ep in venv.pop_finished():
            if ep.slot < episodes and ep.slot not in first:
                first[ep.slot] = ep.discounted
    returns = np.array([first[s] for s in sorted(first)])
    return returns.mean(axis=0), len(returns)


def evaluate(
    checkpoint: PolicyCheckpoint,
    env_name: str | None = None,
    config: EvalConfig | None = None,
    rng: RngStream | None = None,
    env_kwargs: dict | None = None,
    algorithm: str | None = None,
) -> EvaluationRecord:
    """Run every lattice weight through the policy and record mean discounted returns.

    Weight-blind policies are still paired with each lattice weight. All
    weight points share the same environment and action random streams.
    """
    config = config or EvalConfig()
    meta = checkpoint.metadata
    env_name = env_name or meta.get("env")
    if env_name is None:
        raise ValueError("no environment given and none recorded in the checkpoint")
    if meta.get("env") not in (None, env_name):
        raise ValueError(f"checkpoint was trained on {meta['env']!r}, not {env_name!r}")
    env_kwargs = dict(meta.get("env_kwargs", {}) if env_kwargs is None else env_kwargs)
    spec = make_env(env_name, **env_kwargs).spec
    _check_compatible(checkpoint, spec)
    gamma = config.gamma if config.gamma is not None else meta.get("gamma", 0.99)
    seed = rng.seed if rng is not None else config.seed
    name = algorithm or meta.get("variant", "policy")
    return evaluate_policy(checkpoint.network(), env_name, config, name, env_kwargs, gamma, seed)


class ConstantPolicy:
    """Stand-in network that ignores its input and returns fixed logits per weight.

    Used to evaluate analytic policies through the same harness path.
    """

    def __init__(self, logits_fn, action_count: int, value_dim: int, input_length: int):
        self.logits_fn = logits_fn
        self.config = NetworkConfig(input_length, action_count, value_dim, (1,), condition_on_weights=True)

    def forward(self, obs, weights=None):
        obs = np.atleast_2d(obs)
        w = np.atleast_2d(weights)
        logits = np.stack([self.logits_fn(row) for row in np.broadcast_to(w, (len(obs), w.shape[1]))])
        return PolicyOutput(logits, np.zeros((len(obs), self.config.value_dim)))


def evaluate_policy(net, env_name: str, config: EvalConfig, algorithm: str, env_kwargs=None, gamma=0.99, seed=None):
    """Evaluate any object exposing ``config`` and ``forward`` (e.g. ``ConstantPolicy``)."""
    seed = config.seed if seed is None else seed
    env_kwargs = dict(env_kwargs or {})
    spec = make_env(env_name, **env_kwargs).spec
    weights = np.array(simplex_lattice(spec.objective_count, config.weight_point_target))
    returns = np.zeros_like(weights)
    counts = np.zeros(len(weights), dtype=np.int64)
    for i, w in enumerate(weights):
        returns[i], counts[i] = run_episodes(
            net, env_name, env_kwargs, w, config.episodes_per_point, gamma, config.deterministic, seed
        )
    return EvaluationRecord(algorithm, weights, returns, counts, conditioned=net.config.condition_on_weights)

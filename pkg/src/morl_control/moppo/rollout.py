"""Rollout collection and vector-valued generalized advantage estimation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..core import RngStream, sample_simplex_uniform
from ..envs import VectorEnv
from ..nn import PolicyNetwork, log_softmax, sample_actions


class AlgorithmVariant(str, enum.Enum):
    PPO_SCALAR = "ppo"
    MOPPO_UNCONDITIONED = "moppo-nocond"
    MOPPO_CONDITIONED = "moppo"

    @property
    def conditioned(self) -> bool:
        return self is AlgorithmVariant.MOPPO_CONDITIONED

    @property
    def scalar(self) -> bool:
        return self is AlgorithmVariant.PPO_SCALAR

    @classmethod
    def parse(cls, value) -> "AlgorithmVariant":
        if isinstance(value, cls):
            return value
        aliases = {
            "ppo_scalar": cls.PPO_SCALAR,
            "moppo_unconditioned": cls.MOPPO_UNCONDITIONED,
            "moppo_conditioned": cls.MOPPO_CONDITIONED,
        }
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown variant {value!r}; choose from {[v.value for v in cls]}") from None


@dataclass
class RolloutBuffer:
    """Time-major transitions, shape ``(horizon, slots, ...)``.

    ``next_values[t]`` is the critic's estimate for the state after step
    ``t`` in the same episode: the next stored value, the bootstrap value
    after the last step, or the value of the final observation when the
    episode was truncated. Terminated steps ignore it.
    """

    obs: np.ndarray
    actions: np.ndarray
    logprobs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    terminated: np.ndarray
    truncated: np.ndarray
    next_values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.rewards.shape[0]

    @property
    def num_slots(self) -> int:
        return self.rewards.shape[1]

    @property
    def dones(self) -> np.ndarray:
        return self.terminated | self.truncated


def gae(rewards, values, next_values, terminated, dones, gamma: float, lam: float):
    """Per-objective GAE over time-major arrays ``(T, N, D)``; returns (advantages, targets).

    ``delta_t = r_t + gamma * v'_t * (1 - terminated_t) - v_t`` and
    ``A_t = delta_t + gamma * lam * (1 - done_t) * A_{t+1}``.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    next_values = np.asarray(next_values, dtype=np.float64)
    keep_next = 1.0 - np.asarray(terminated, dtype=np.float64)[..., None]
    carry = 1.0 - np.asarray(dones, dtype=np.float64)[..., None]
    deltas = rewards + gamma * next_values * keep_next - values
    adv = np.zeros_like(rewards)
    running = np.zeros(rewards.shape[1:])
    for t in range(rewards.shape[0] - 1, -1, -1):
        running = deltas[t] + gamma * lam * carry[t] * running
        adv[t] = running
    return adv, adv + values


def vector_gae(buffer: RolloutBuffer, gamma: float, lam: float):
    return gae(buffer.rewards, buffer.values, buffer.next_values, buffer.terminated, buffer.dones, gamma, lam)


class RolloutCollector:
    """Keeps environment state and per-episode weights between rollouts.

    Every slot draws a fresh weight vector from the simplex whenever its
    episode starts. The scalar variant always uses the weight ``(1,)``.
    """

    def __init__(self, venv: VectorEnv, variant: AlgorithmVariant, rng: RngStream):
        self.venv = venv
        self.variant = variant
        self.rng = rng
        self.dim = venv.spec.objective_count
        self.obs = venv.reset(rng.spawn(0))
        self.weights = np.stack([self._draw_weight() for _ in range(venv.num_slots)])

    def _draw_weight(self) -> np.ndarray:
        if self.variant.scalar:
            return np.ones(1)
        return sample_simplex_uniform(self.rng, self.dim)

    def _policy_inputs(self, weights):
        return weights if self.variant.conditioned else None

    def collect(self, policy: PolicyNetwork, horizon: int) -> RolloutBuffer:
        venv = self.venv
        n, d = venv.num_slots, self.dim
        if policy.config.input_length != venv.spec.observation_length:
            raise ValueError(
                f"policy expects observations of length {policy.config.input_length}, "
                f"environment produces {venv.spec.observation_length}"
            )
        if policy.config.value_dim != d:
            raise ValueError(f"policy value head has {policy.config.value_dim} outputs, environment has {d} objectives")
        obs_buf = np.zeros((horizon, n, venv.spec.observation_length))
        act_buf = np.zeros((horizon, n), dtype=np.int64)
        logp_buf = np.zeros((horizon, n))
        rew_buf = np.zeros((horizon, n, d))
        val_buf = np.zeros((horizon, n, d))
        w_buf = np.zeros((horizon, n, d))
        term_buf = np.zeros((horizon, n), dtype=bool)
        trunc_buf = np.zeros((horizon, n), dtype=bool)
        next_val = np.zeros((horizon, n, d))

        for t in range(horizon):
            out = policy.forward(self.obs, self._policy_inputs(self.weights))
            actions = sample_actions(out.action_logits, self.rng)
            logp = log_softmax(out.action_logits)[np.arange(n), actions]
            obs_buf[t] = self.obs
            act_buf[t] = actions
            logp_buf[t] = logp
            val_buf[t] = out.value
            w_buf[t] = self.weights

            next_obs, rewards, term, trunc, final_obs = venv.step(actions)
            rew_buf[t] = rewards
            term_buf[t] = term
            trunc_buf[t] = trunc
            if trunc.any():
                idx = np.flatnonzero(trunc)
                w_in = self.weights[idx] if self.variant.conditioned else None
                next_val[t, idx] = policy.forward(final_obs[idx], w_in).value
            for slot in np.flatnonzero(term | trunc):
                self.weights[slot] = self._draw_weight()
            self.obs = next_obs

        bootstrap = policy.forward(self.obs, self._policy_inputs(self.weights)).value
        # the value of s_{t+1} within the same episode
        for t in range(horizon):
            following = val_buf[t + 1] if t + 1 < horizon else bootstrap
            cont = ~(term_buf[t] | trunc_buf[t])
            next_val[t, cont] = following[cont]
        return RolloutBuffer(obs_buf, act_buf, logp_buf, rew_buf, val_buf, w_buf, term_buf, trunc_buf, next_val)

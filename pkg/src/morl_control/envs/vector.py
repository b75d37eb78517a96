"""Batched stepping over many environment instances with automatic resets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import RngStream


@dataclass
class EpisodeStats:
    slot: int
    length: int
    undiscounted: np.ndarray
    discounted: np.ndarray


class VectorEnv:
    """Flattens ``(instance, agent)`` pairs into slots and auto-resets finished ones.

    Each instance owns its own ``RngStream`` derived from the batch stream,
    so slot trajectories do not depend on how many instances share a batch.
    Episode statistics always hold the per-objective components, also when
    the instances are scalar reward views.
    """

    def __init__(self, envs, gamma: float = 0.99):
        if not envs:
            raise ValueError("need at least one environment instance")
        self.envs = list(envs)
        self.spec = self.envs[0].spec
        for e in self.envs:
            if e.spec != self.spec:
                raise ValueError("all instances in a batch must share one EnvSpec")
        self.gamma = gamma
        self.agents = self.spec.agents_per_instance
        self.num_slots = len(self.envs) * self.agents
        inner = getattr(self.envs[0], "env", self.envs[0])
        d = inner.spec.objective_count
        self._ret = np.zeros((self.num_slots, d))
        self._disc = np.zeros((self.num_slots, d))
        self._discount = np.ones(self.num_slots)
        self._len = np.zeros(self.num_slots, dtype=np.int64)
        self.finished: list[EpisodeStats] = []

    def reset(self, rng: RngStream) -> np.ndarray:
        obs = [env.reset(rng.spawn(i)) for i, env in enumerate(self.envs)]
        self._ret[:] = 0
        self._disc[:] = 0
        self._discount[:] = 1
        self._len[:] = 0
        self.finished = []
        return np.concatenate(obs, axis=0)

    def step(self, actions):
        """Step every slot.

        Returns ``(next_obs, rewards, terminated, truncated, final_obs)``.
        For slots whose episode just ended, ``next_obs`` already holds the
        first observation of the next episode and ``final_obs`` holds the
        last observation of the finished one.
        """
        actions = np.asarray(actions, dtype=np.int64).reshape(self.num_slots)
        k = self.agents
        parts = [env.step_arrays(actions[i * k : (i + 1) * k]) for i, env in enumerate(self.envs)]
        obs = np.concatenate([p[0] for p in parts], axis=0)
        rewards = np.concatenate([p[1] for p in parts], axis=0)
        term = np.concatenate([p[2] for p in parts])
        trunc = np.concatenate([p[3] for p in parts])
        final_obs = obs.copy()
        components = rewards
        if hasattr(self.envs[0], "last_vector_rewards"):
            components = np.concatenate([e.last_vector_rewards for e in self.envs], axis=0)

        self._ret += components
        self._disc += self._discount[:, None] * components
        self._discount *= self.gamma
        self._len += 1
        done = np.flatnonzero(term | trunc)
        for slot in done:
            self.finished.append(
                EpisodeStats(int(slot), int(self._len[slot]), self._ret[slot].copy(), self._disc[slot].copy())
            )
            self._ret[slot] = 0
            self._disc[slot] = 0
            self._discount[slot] = 1
            self._len[slot] = 0
            env = self.envs[slot // k]
            obs[slot] = env.reset_agent(slot % k)
        return obs, rewards, term, trunc, final_obs

    def pop_finished(self) -> list[EpisodeStats]:
        out, self.finished = self.finished, []
        return out

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import RngStream


@dataclass(frozen=True)
class EnvSpec:
    name: str
    objective_count: int
    objective_names: tuple[str, ...]
    observation_length: int
    action_count: int
    agents_per_instance: int = 1
    max_episode_steps: int = 1
    truncation_jitter: int = 0

    def __post_init__(self):
        if self.objective_count < 1:
            raise ValueError("objective_count must be positive")
        if len(self.objective_names) != self.objective_count:
            raise ValueError(
                f"{len(self.objective_names)} objective names for {self.objective_count} objectives"
            )
        if self.observation_length < 1 or self.action_count < 1 or self.agents_per_instance < 1:
            raise ValueError("observation_length, action_count and agents_per_instance must be positive")
        if self.max_episode_steps < 1:
            raise ValueError("max_episode_steps must be >= 1")
        if not (0 <= self.truncation_jitter < self.max_episode_steps):
            raise ValueError("truncation_jitter must satisfy 0 <= jitter < max_episode_steps")


@dataclass
class StepResult:
    observation: np.ndarray
    reward: np.ndarray
    terminated: bool
    truncated: bool

    def __post_init__(self):
        if self.terminated and self.truncated:
            raise ValueError("a step cannot be both terminated and truncated")


class MultiObjectiveEnv:
    """Base class for environments that emit one reward vector per agent.

    Subclasses implement ``_reset`` and ``_step``. Per-agent episode
    bookkeeping (step counters, jittered truncation horizons, done flags)
    lives here.
    """

    spec: EnvSpec

    def __init__(self):
        self.rng: RngStream | None = None
        n = self.spec.agents_per_instance
        self._episode_steps = np.zeros(n, dtype=np.int64)
        self._horizons = np.full(n, self.spec.max_episode_steps, dtype=np.int64)
        self._done = np.ones(n, dtype=bool)

    @property
    def num_agents(self) -> int:
        return self.spec.agents_per_instance

    def _draw_horizon(self) -> int:
        j = self.spec.truncation_jitter
        if j == 0:
            return self.spec.max_episode_steps
        return int(self.spec.max_episode_steps + self.rng.integers(-j, j + 1))

    def reset(self, rng: RngStream) -> np.ndarray:
        """Start fresh episodes for every agent; returns observations of shape (agents, obs_len)."""
        self.rng = rng
        self._episode_steps[:] = 0
        for i in range(self.num_agents):
            self._horizons[i] = self._draw_horizon()
        self._done[:] = False
        return self._reset()

    def reset_agent(self, agent: int) -> np.ndarray:
        """Start a new episode for one agent after it finished; returns its observation."""
        if self.rng is None:
            raise RuntimeError("reset() must be called before reset_agent()")
        if self.num_agents == 1:
            return self.reset(self.rng)[0]
        self._episode_steps[agent] = 0
        self._horizons[agent] = self._draw_horizon()
        self._done[agent] = False
        return self._respawn(agent)

    def step_arrays(self, actions: Sequence[int]):
        """Advance one tick; returns ``(obs, rewards, terminated, truncated)`` arrays."""
        if self.rng is None:
            raise RuntimeError("step() called before reset()")
        actions = np.asarray(actions, dtype=np.int64).reshape(-1)
        if actions.shape[0] != self.num_agents:
            raise ValueError(f"expected {self.num_agents} actions, got {actions.shape[0]}")
        bad = (actions < 0) | (actions >= self.spec.action_count)
        if bad.any():
            raise ValueError(
                f"action ids {actions[bad].tolist()} outside [0, {self.spec.action_count})"
            )
        if self._done.any():
            raise RuntimeError(
                f"agents {np.flatnonzero(self._done).tolist()} stepped after their episode ended; reset first"
            )
        obs, rewards, terminated = self._step(actions)
        self._episode_steps += 1
        truncated = (self._episode_steps >= self._horizons) & ~terminated
        self._done = terminated | truncated
        return obs, rewards, terminated, truncated

    def step(self, actions: Sequence[int]) -> list[StepResult]:
        obs, rewards, term, trunc = self.step_arrays(actions)
        return [
            StepResult(obs[i], rewards[i], bool(term[i]), bool(trunc[i]))
            for i in range(self.num_agents)
        ]

    def _reset(self) -> np.ndarray:
        raise NotImplementedError

    def _respawn(self, agent: int) -> np.ndarray:
        raise NotImplementedError

    def _step(self, actions: np.ndarray):
        raise NotImplementedError


class ScalarRewardView:
    """Adapter that sums the reward components, for single-objective PPO."""

    def __init__(self, env: MultiObjectiveEnv):
        self.env = env
        self.last_vector_rewards: np.ndarray | None = None
        s = env.spec
        self.spec = EnvSpec(
            name=s.name,
            objective_count=1,
            objective_names=("total",),
            observation_length=s.observation_length,
            action_count=s.action_count,
            agents_per_instance=s.agents_per_instance,
            max_episode_steps=s.max_episode_steps,
            truncation_jitter=s.truncation_jitter,
        )

    @property
    def num_agents(self) -> int:
        return self.env.num_agents

    def reset(self, rng: RngStream) -> np.ndarray:
        return self.env.reset(rng)

    def reset_agent(self, agent: int) -> np.ndarray:
        return self.env.reset_agent(agent)

    def step_arrays(self, actions):
        obs, rewards, term, trunc = self.env.step_arrays(actions)
        self.last_vector_rewards = rewards
        return obs, rewards.sum(axis=1, keepdims=True), term, trunc

    def step(self, actions) -> list[StepResult]:
        obs, rewards, term, trunc = self.step_arrays(actions)
        return [
            StepResult(obs[i], rewards[i], bool(term[i]), bool(trunc[i]))
            for i in range(self.num_agents)
        ]


def scalar_reward_view(env: MultiObjectiveEnv) -> ScalarRewardView:
    return ScalarRewardView(env)


@dataclass
class TraceRecorder:
    """Collects per-step rows ``step, agent, action, reward_*, terminated, truncated``."""

    objective_count: int
    rows: list = field(default_factory=list)

    def record(self, step: int, actions, results: Sequence[StepResult]):
        for agent, (a, r) in enumerate(zip(actions, results)):
            self.rows.append(
                [step, agent, int(a), *[float(x) for x in r.reward], int(r.terminated), int(r.truncated)]
            )

    def write(self, path):
        header = ["step", "agent", "action"]
        header += [f"reward_{d}" for d in range(self.objective_count)]
        header += ["terminated", "truncated"]
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(header)
            for row in self.rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in row])

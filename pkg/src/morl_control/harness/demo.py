"""Mid-episode preference switching."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..core import RngStream, weight_vector
from ..envs import make_env
from ..nn import PolicyCheckpoint, sample_actions


@dataclass
class DemoSegment:
    start: int
    stop: int
    weight: np.ndarray
    mean_reward: np.ndarray


@dataclass
class DemoLog:
    steps: list[int] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list)
    rewards: list[np.ndarray] = field(default_factory=list)
    segments: list[DemoSegment] = field(default_factory=list)

    def reward_array(self) -> np.ndarray:
        return np.array(self.rewards)

    def rate(self, objective: int, start: int, stop: int) -> float:
        r = self.reward_array()[start:stop, objective]
        return float(r.mean()) if r.size else 0.0


def parse_schedule(text: str) -> list[tuple[int, np.ndarray]]:
    """``"0:0.5,0.5,0; 500:0,0,1"`` -> ``[(0, w0), (500, w1)]``."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        step, weights = chunk.split(":", 1)
        out.append((int(step), weight_vector([float(x) for x in weights.split(",")])))
    return out


def dynamic_demo(
    checkpoint: PolicyCheckpoint,
    schedule: list[tuple[int, np.ndarray]],
    horizon: int,
    env_name: str | None = None,
    env_kwargs: dict | None = None,
    rng: RngStream | None = None,
    deterministic: bool = False,
    initial_weight=None,
) -> DemoLog:
    """Run one episode of agent 0, swapping the conditioning weight at each scheduled step.

    The weight before the first switch is ``initial_weight`` (default: the
    first scheduled weight). Per-step rewards and per-segment mean rewards
    are logged. The bandit is run in its multi-step variant.
    """
    if not checkpoint.config.condition_on_weights:
        raise ValueError("the preference switch demo needs a weight-conditioned checkpoint")
    schedule = sorted(((int(s), weight_vector(w)) for s, w in schedule), key=lambda x: x[0])
    for step, _ in schedule:
        if not (0 <= step < horizon):
            raise ValueError(f"switch step {step} is outside the horizon [0, {horizon})")
    meta = checkpoint.metadata
    env_name = env_name or meta.get("env")
    kwargs = dict(meta.get("env_kwargs", {}) if env_kwargs is None else env_kwargs)
    if env_name == "bandit":
        kwargs.update(sequential=True, horizon=horizon)
    else:
        kwargs.update(max_episode_steps=horizon, truncation_jitter=0)
    env = make_env(env_name, **kwargs)
    if env.spec.objective_count != checkpoint.config.value_dim:
        raise ValueError("checkpoint objective count does not match the environment")
    rng = rng or RngStream(0)
    net = checkpoint.network()
    obs = env.reset(rng.spawn(0))
    act_rng = rng.spawn(1)
    if initial_weight is not None:
        current = weight_vector(initial_weight)
    elif schedule:
        current = schedule[0][1]
    else:
        raise ValueError("need a schedule or an initial weight")
    switches = dict(schedule)
    log = DemoLog()
    n = env.num_agents
    for t in range(horizon):
        current = switches.get(t, current)
        logits = net.forward(obs, np.broadcast_to(current, (n, current.size))).action_logits
        actions = np.argmax(logits, axis=1) if deterministic else sample_actions(logits, act_rng)
        obs, rewards, term, trunc = env.step_arrays(actions)
        log.steps.append(t)
        log.actions.append(int(actions[0]))
        log.weights.append(current.copy())
        log.rewards.append(rewards[0].copy())
        if term[0] or trunc[0]:
            break
        if (term | trunc).any():
            for i in np.flatnonzero(term | trunc):
                obs[i] = env.reset_agent(int(i))
    bounds = sorted({0, *[s for s, _ in schedule if s < len(log.steps)], len(log.steps)})
    for start, stop in zip(bounds[:-1], bounds[1:]):
        log.segments.append(
            DemoSegment(start, stop, log.weights[start], log.reward_array()[start:stop].mean(axis=0))
        )
    return log


def write_demo_csv(path, log: DemoLog):
    d = len(log.rewards[0]) if log.rewards else 0
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "action", *[f"w_{k}" for k in range(d)], *[f"reward_{k}" for k in range(d)]])
        for t, a, wt, r in zip(log.steps, log.actions, log.weights, log.rewards):
            w.writerow([t, a, *map(repr, map(float, wt)), *map(repr, map(float, r))])

from .bandit import PreferenceBandit, preference_bandit_optimal_return
from .base import EnvSpec, MultiObjectiveEnv, ScalarRewardView, StepResult, TraceRecorder, scalar_reward_view
from .snake import Snake
from .tetris import Tetris
from .vector import EpisodeStats, VectorEnv

ENVIRONMENTS = {"bandit": PreferenceBandit, "snake": Snake, "tetris": Tetris}

# discount factors used for training and evaluation
DISCOUNTS = {"bandit": 0.99, "snake": 0.9997, "tetris": 0.995}

# full-size settings; the constructor defaults are the small desk-scale ones
FULL_SCALE = {
    "snake": {"num_agents": 256, "max_episode_steps": 3000, "truncation_jitter": 300},
    "tetris": {"max_episode_steps": 3000},
}


def make_env(name: str, **overrides) -> MultiObjectiveEnv:
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None
    return cls(**overrides)


__all__ = [
    "DISCOUNTS",
    "ENVIRONMENTS",
    "EnvSpec",
    "EpisodeStats",
    "MultiObjectiveEnv",
    "FULL_SCALE",
    "PreferenceBandit",
    "ScalarRewardView",
    "Snake",
    "StepResult",
    "Tetris",
    "TraceRecorder",
    "VectorEnv",
    "make_env",
    "preference_bandit_optimal_return",
    "scalar_reward_view",
]

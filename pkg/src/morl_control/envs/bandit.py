"""Stateless three-armed diagnostic bandit with a known optimal preference mapping."""

from __future__ import annotations

import numpy as np

from ..core import weight_vector
from .base import EnvSpec, MultiObjectiveEnv


class PreferenceBandit(MultiObjectiveEnv):
    """Pulling arm ``d`` pays the unit reward vector ``e_d``.

    By default each episode is a single pull. With ``sequential=True`` the
    episode keeps going for ``horizon`` pulls, which is what the preference
    switching demo needs.
    """

    def __init__(self, sequential: bool = False, horizon: int = 1, num_objectives: int = 3):
        self.sequential = sequential
        self.spec = EnvSpec(
            name="bandit",
            objective_count=num_objectives,
            objective_names=tuple(f"arm_{d}" for d in range(num_objectives)),
            observation_length=1,
            action_count=num_objectives,
            agents_per_instance=1,
            max_episode_steps=horizon if sequential else 1,
        )
        self._eye = np.eye(num_objectives)
        self._obs = np.zeros((1, 1))
        super().__init__()

    def _reset(self):
        return self._obs.copy()

    def _step(self, actions):
        rewards = self._eye[actions]
        terminated = np.array([not self.sequential])
        return self._obs.copy(), rewards, terminated


def preference_bandit_optimal_return(w) -> np.ndarray:
    """Episode return of the optimal conditioned bandit policy: ``e_argmax(w)``.

    Ties go to the lowest index.
    """
    w = weight_vector(w)
    out = np.zeros_like(w)
    out[int(np.argmax(w))] = 1.0
    return out

"""Multi-agent Snake with per-agent vector rewards (food, corpse, death)."""

from __future__ import annotations

from collections import deque

import numpy as np

from .base import EnvSpec, MultiObjectiveEnv

EMPTY, WALL, FOOD, CORPSE, SNAKE = 0, 1, 2, 3, 4

FOOD_REWARD = 0.1
CORPSE_REWARD = 0.01
DEATH_REWARD = -1.0

# up, down, left, right
DIRECTIONS = ((-1, 0), (1, 0), (0, -1), (0, 1))
N_CHANNELS = 6


class Snake(MultiObjectiveEnv):
    """Snakes share a walled grid and compete for food.

    Agents move in index order each tick. Eating food or a corpse grows the
    snake by one; food is respawned elsewhere, corpses are not. Hitting a
    wall or any snake body kills the snake and turns its body into corpse
    cells. A finished agent respawns via ``reset_agent``.
    """

    def __init__(
        self,
        grid_size: int = 16,
        num_agents: int = 4,
        num_food: int = 8,
        view_radius: int = 5,
        max_episode_steps: int = 512,
        truncation_jitter: int = 64,
    ):
        self.grid_size = grid_size
        self.num_food = num_food
        self.radius = view_radius
        window = 2 * view_radius + 1
        self.spec = EnvSpec(
            name="snake",
            objective_count=3,
            objective_names=("food", "corpse", "death"),
            observation_length=N_CHANNELS * window * window,
            action_count=4,
            agents_per_instance=num_agents,
            max_episode_steps=max_episode_steps,
            truncation_jitter=truncation_jitter,
        )
        side = grid_size + 2 * view_radius
        self.cells = np.full((side, side), WALL, dtype=np.int16)
        self.bodies: list[deque] = [deque() for _ in range(num_agents)]
        self.heading = [0] * num_agents
        self.heads = [(0, 0)] * num_agents
        self._channel_codes = np.arange(N_CHANNELS - 2, dtype=np.int16)[:, None, None]
        super().__init__()

    @property
    def interior(self) -> np.ndarray:
        p, g = self.radius, self.grid_size
        return self.cells[p : p + g, p : p + g]

    def _random_free_cell(self) -> tuple[int, int]:
        free = np.flatnonzero(self.interior == EMPTY)
        if free.size == 0:
            free = np.flatnonzero(self.interior == CORPSE)
        if free.size == 0:
            raise RuntimeError("no free cell left on the grid")
        k = int(free[self.rng.integers(free.size)])
        return k // self.grid_size + self.radius, k % self.grid_size + self.radius

    def _spawn(self, agent: int):
        r, c = self._random_free_cell()
        self.cells[r, c] = SNAKE + agent
        self.bodies[agent] = deque([(r, c)])
        self.heads[agent] = (r, c)
        self.heading[agent] = int(self.rng.integers(4))

    def _reset(self):
        self.cells.fill(WALL)
        self.interior.fill(EMPTY)
        for _ in range(self.num_food):
            self.cells[self._random_free_cell()] = FOOD
        for i in range(self.num_agents):
            self._spawn(i)
        return self._observe()

    def _respawn(self, agent):
        # a truncated snake is still on the board; a dead one already left corpse
        for cell in self.bodies[agent]:
            if self.cells[cell] == SNAKE + agent:
                self.cells[cell] = EMPTY
        self._spawn(agent)
        return self._observe_agent(agent)

    def _step(self, actions):
        n = self.num_agents
        rewards = np.zeros((n, 3))
        terminated = np.zeros(n, dtype=bool)
        cells = self.cells
        for i in range(n):
            body = self.bodies[i]
            d = int(actions[i])
            if len(body) > 1 and DIRECTIONS[d][0] == -DIRECTIONS[self.heading[i]][0] and \
                    DIRECTIONS[d][1] == -DIRECTIONS[self.heading[i]][1]:
                d = self.heading[i]
            self.heading[i] = d
            hr, hc = self.heads[i]
            nr, nc = hr + DIRECTIONS[d][0], hc + DIRECTIONS[d][1]
            target = cells[nr, nc]
            if target != FOOD and target != CORPSE:
                tail = body.pop()
                cells[tail] = EMPTY
                target = cells[nr, nc]
            if target == WALL or target >= SNAKE:
                rewards[i, 2] = DEATH_REWARD
                terminated[i] = True
                for cell in body:
                    cells[cell] = CORPSE
                continue
            if target == FOOD:
                rewards[i, 0] = FOOD_REWARD
            elif target == CORPSE:
                rewards[i, 1] = CORPSE_REWARD
            cells[nr, nc] = SNAKE + i
            body.appendleft((nr, nc))
            self.heads[i] = (nr, nc)
            if target == FOOD:
                cells[self._random_free_cell()] = FOOD
        return self._observe(), rewards, terminated

    def _window(self, agent: int) -> np.ndarray:
        r, c = self.heads[agent]
        k = self.radius
        return self.cells[r - k : r + k + 1, c - k : c + k + 1]

    def _encode(self, window: np.ndarray, agent: int) -> np.ndarray:
        planes = np.empty((N_CHANNELS,) + window.shape, dtype=np.float64)
        planes[:4] = window[None] == self._channel_codes
        own = window == SNAKE + agent
        planes[4] = own
        planes[5] = (window >= SNAKE) & ~own
        return planes.reshape(-1)

    def _observe_agent(self, agent: int) -> np.ndarray:
        return self._encode(self._window(agent), agent)

    def _observe(self) -> np.ndarray:
        return np.stack([self._observe_agent(i) for i in range(self.num_agents)])

    def food_count(self) -> int:
        return int(np.count_nonzero(self.interior == FOOD))

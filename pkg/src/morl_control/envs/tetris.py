"""Single-agent Tetris with vector rewards (combo, drop, rotate)."""

from __future__ import annotations

import numpy as np

from .base import EnvSpec, MultiObjectiveEnv

COMBO_PER_LINE = 0.25
DROP_REWARD = 0.02
ROTATE_REWARD = 0.01

LEFT, RIGHT, ROTATE, SOFT_DROP, HARD_DROP, NOOP = range(6)

_BASE_SHAPES = {
    "I": ["####"],
    "O": ["##", "##"],
    "T": [".#.", "###"],
    "S": [".##", "##."],
    "Z": ["##.", ".##"],
    "J": ["#..", "###"],
    "L": ["..#", "###"],
}
PIECE_NAMES = tuple(_BASE_SHAPES)


def _rotations(rows: list[str]) -> list[tuple[tuple[int, int], ...]]:
    cells = [(r, c) for r, line in enumerate(rows) for c, ch in enumerate(line) if ch == "#"]
    out = []
    for _ in range(4):
        out.append(tuple(sorted(cells)))
        height = max(r for r, _ in cells) + 1
        # clockwise: (r, c) -> (c, height - 1 - r)
        cells = [(c, height - 1 - r) for r, c in cells]
    return out


PIECES = [_rotations(_BASE_SHAPES[name]) for name in PIECE_NAMES]


class Tetris(MultiObjectiveEnv):
    """Classic falling-block game on a ``width`` x ``height`` board.

    Actions: left, right, rotate clockwise, soft drop, hard drop, no-op.
    Pieces come from a shuffled 7-bag. Gravity pulls the active piece down
    one row every ``gravity_interval`` ticks; the interval shrinks by one
    (down to 1) every ``speedup_every`` locked pieces. The episode ends when
    a new piece cannot spawn.
    """

    def __init__(
        self,
        width: int = 10,
        height: int = 20,
        max_episode_steps: int = 1000,
        truncation_jitter: int = 0,
        gravity_interval: int = 8,
        speedup_every: int = 200,
    ):
        self.width = width
        self.height = height
        self.initial_gravity = gravity_interval
        self.speedup_every = speedup_every
        self.spec = EnvSpec(
            name="tetris",
            objective_count=3,
            objective_names=("combo", "drop", "rotate"),
            observation_length=width * height + len(PIECES) + 4 + width,
            action_count=6,
            agents_per_instance=1,
            max_episode_steps=max_episode_steps,
            truncation_jitter=truncation_jitter,
        )
        self.board = [[0] * width for _ in range(height)]
        self.bag: list[int] = []
        self.history: list[int] = []
        super().__init__()

    def _next_piece(self) -> int:
        if not self.bag:
            self.bag = [int(k) for k in self.rng.generator.permutation(len(PIECES))]
        piece = self.bag.pop()
        self.history.append(piece)
        return piece

    def _fits(self, piece: int, rot: int, row: int, col: int) -> bool:
        board = self.board
        for dr, dc in PIECES[piece][rot]:
            r, c = row + dr, col + dc
            if c < 0 or c >= self.width or r >= self.height:
                return False
            if r >= 0 and board[r][c]:
                return False
        return True

    def _spawn(self) -> bool:
        self.piece = self._next_piece()
        self.rot = 0
        span = max(c for _, c in PIECES[self.piece][0]) + 1
        self.row = 0
        self.col = (self.width - span) // 2
        return self._fits(self.piece, self.rot, self.row, self.col)

    @property
    def gravity(self) -> int:
        return max(1, self.initial_gravity - self.locked // self.speedup_every)

    def _reset(self):
        for line in self.board:
            line[:] = [0] * self.width
        self.bag = []
        self.history = []
        self.locked = 0
        self.lines_cleared = 0
        self.ticks = 0
        self.last_clear = 0
        self._spawn()
        return self._observe()[None]

    def _lock(self) -> tuple[int, bool]:
        """Write the active piece into the board; returns (lines cleared, game over)."""
        for dr, dc in PIECES[self.piece][self.rot]:
            r = self.row + dr
            if r < 0:
                return 0, True
            self.board[r][self.col + dc] = 1
        self.locked += 1
        full = [r for r in range(self.height) if all(self.board[r])]
        if full:
            kept = [line for r, line in enumerate(self.board) if r not in full]
            self.board = [[0] * self.width for _ in full] + kept
        self.lines_cleared += len(full)
        self.last_clear = len(full)
        return len(full), not self._spawn()

    def _step(self, actions):
        a = int(actions[0])
        reward = np.zeros((1, 3))
        locked = False
        game_over = False
        cleared = 0
        if a == LEFT and self._fits(self.piece, self.rot, self.row, self.col - 1):
            self.col -= 1
        elif a == RIGHT and self._fits(self.piece, self.rot, self.row, self.col + 1):
            self.col += 1
        elif a == ROTATE:
            rot = (self.rot + 1) % 4
            if self._fits(self.piece, rot, self.row, self.col):
                self.rot = rot
                reward[0, 2] = ROTATE_REWARD
        elif a == SOFT_DROP:
            if self._fits(self.piece, self.rot, self.row + 1, self.col):
                self.row += 1
            else:
                cleared, game_over = self._lock()
                locked = True
        elif a == HARD_DROP:
            while self._fits(self.piece, self.rot, self.row + 1, self.col):
                self.row += 1
            reward[0, 1] = DROP_REWARD
            cleared, game_over = self._lock()
            locked = True
        self.ticks += 1
        if not locked and not game_over and self.ticks % self.gravity == 0:
            if self._fits(self.piece, self.rot, self.row + 1, self.col):
                self.row += 1
            else:
                cleared, game_over = self._lock()
        reward[0, 0] = COMBO_PER_LINE * cleared
        return self._observe()[None], reward, np.array([game_over])

    def _respawn(self, agent):
        raise RuntimeError("Tetris is single-agent; use reset()")

    def _observe(self) -> np.ndarray:
        w, h = self.width, self.height
        obs = np.zeros(self.spec.observation_length)
        obs[: w * h] = np.asarray(self.board, dtype=np.float64).reshape(-1)
        base = w * h
        obs[base + self.piece] = 1.0
        obs[base + len(PIECES) + self.rot] = 1.0
        obs[base + len(PIECES) + 4 + self.col] = 1.0
        return obs

    def occupancy(self) -> int:
        return sum(map(sum, self.board))

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morl_control.core import RngStream, simplex_lattice
from morl_control.envs import (
    EnvSpec,
    PreferenceBandit,
    Snake,
    StepResult,
    Tetris,
    TraceRecorder,
    VectorEnv,
    make_env,
    preference_bandit_optimal_return,
    scalar_reward_view,
)
from morl_control.envs import snake as snake_mod
from morl_control.envs import tetris as tetris_mod


def _run(env, seed, actions_seed, steps):
    """Step with a fixed random action stream, resetting finished agents; returns all arrays."""
    g = np.random.default_rng(actions_seed)
    out = [env.reset(RngStream(seed))]
    for _ in range(steps):
        a = g.integers(env.spec.action_count, size=env.num_agents)
        obs, r, term, trunc = env.step_arrays(a)
        out += [obs.copy(), r.copy(), term.copy(), trunc.copy()]
        for i in np.flatnonzero(term | trunc):
            out.append(env.reset_agent(int(i)).copy())
    return out


# --- spec types ---


def test_env_spec_validation():
    with pytest.raises(ValueError):
        EnvSpec("x", 2, ("a",), 1, 1, 1, 5)
    with pytest.raises(ValueError):
        EnvSpec("x", 1, ("a",), 1, 1, 1, 5, truncation_jitter=5)
    with pytest.raises(ValueError):
        StepResult(np.zeros(1), np.zeros(1), True, True)


def test_make_env_unknown():
    with pytest.raises(ValueError, match="unknown environment"):
        make_env("moba")


# --- bandit ---


def test_bandit_reward_is_unit_vector():
    env = PreferenceBandit()
    obs = env.reset(RngStream(0))
    assert obs.shape == (1, 1) and np.all(obs == 0)
    for a in range(3):
        env.reset(RngStream(0))
        (res,) = env.step([a])
        assert np.array_equal(res.reward, np.eye(3)[a])
        assert res.terminated and not res.truncated


def test_bandit_errors():
    env = PreferenceBandit()
    env.reset(RngStream(0))
    with pytest.raises(ValueError):
        env.step([3])
    env.step([0])
    with pytest.raises(RuntimeError):
        env.step([0])


def test_bandit_sequential_truncates_at_horizon():
    env = PreferenceBandit(sequential=True, horizon=4)
    env.reset(RngStream(0))
    flags = [env.step([1])[0] for _ in range(4)]
    assert [f.truncated for f in flags] == [False, False, False, True]
    assert not any(f.terminated for f in flags)


def test_bandit_optimal_return_examples():
    assert np.array_equal(preference_bandit_optimal_return([1, 0, 0]), [1, 0, 0])
    assert np.array_equal(preference_bandit_optimal_return([0.2, 0.5, 0.3]), [0, 1, 0])
    assert np.array_equal(preference_bandit_optimal_return([1 / 3, 1 / 3, 1 / 3]), [1, 0, 0])


# --- snake ---


def _snake_after_reset(seed=0, **kw):
    env = Snake(**kw)
    env.reset(RngStream(seed))
    return env


def test_snake_reset_deterministic():
    a, b = _snake_after_reset(4), _snake_after_reset(4)
    assert np.array_equal(a.cells, b.cells)
    assert a.food_count() == a.num_food
    c = _snake_after_reset(5)
    assert not np.array_equal(a.cells, c.cells)


def _place_single(env, head, heading):
    """Clear the grid around a single length-1 snake at ``head`` facing ``heading``."""
    env.interior.fill(snake_mod.EMPTY)
    env.cells[head] = snake_mod.SNAKE
    env.bodies[0].clear()
    env.bodies[0].append(head)
    env.heads[0] = head
    env.heading[0] = heading


def test_snake_food_reward():
    env = _snake_after_reset(num_agents=1, num_food=1)
    p = env.radius
    head = (p + 5, p + 5)
    _place_single(env, head, 3)
    env.cells[p + 5, p + 6] = snake_mod.FOOD
    (res,) = env.step([3])
    assert np.array_equal(res.reward, [0.1, 0.0, 0.0])
    assert len(env.bodies[0]) == 2
    assert env.food_count() == 1


def test_snake_corpse_reward():
    env = _snake_after_reset(num_agents=1, num_food=1)
    p = env.radius
    _place_single(env, (p + 5, p + 5), 3)
    env.cells[p + 5, p + 6] = snake_mod.CORPSE
    (res,) = env.step([3])
    assert np.array_equal(res.reward, [0.0, 0.01, 0.0])


def test_snake_wall_death():
    env = _snake_after_reset(num_agents=1, num_food=1)
    p = env.radius
    _place_single(env, (p, p + 3), 0)
    (res,) = env.step([0])
    assert np.array_equal(res.reward, [0.0, 0.0, -1.0])
    assert res.terminated and not res.truncated


def test_snake_reverse_is_straight():
    env = _snake_after_reset(num_agents=1, num_food=1)
    p = env.radius
    _place_single(env, (p + 5, p + 5), 3)
    env.cells[p + 5, p + 4] = snake_mod.SNAKE
    env.bodies[0].append((p + 5, p + 4))
    env.step([2])  # reversal into the neck
    assert env.heads[0] == (p + 5, p + 6)


def test_snake_observation_shape():
    env = Snake()
    obs = env.reset(RngStream(0))
    assert obs.shape == (4, 726)
    planes = obs.reshape(4, 6, 11, 11)
    # exactly one channel per cell, own head at the centre
    assert np.all(planes.sum(axis=1) == 1)
    assert np.all(planes[:, 4, 5, 5] == 1)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_snake_invariants(seed):
    env = Snake(grid_size=10, num_agents=3, num_food=4, max_episode_steps=60, truncation_jitter=10)
    env.reset(RngStream(seed))
    g = np.random.default_rng(seed)
    lengths = np.zeros(3, dtype=int)
    for _ in range(200):
        before = env.food_count()
        obs, r, term, trunc = env.step_arrays(g.integers(4, size=3))
        lengths += 1
        eaten = int(np.count_nonzero(r[:, 0] > 0))
        # food is only removed by eating, and every eaten item is respawned
        assert env.food_count() == before
        assert eaten <= env.num_food
        occupied = [c for i in range(3) if not term[i] for c in env.bodies[i]]
        assert len(occupied) == len(set(occupied))
        for i in range(3):
            if not term[i]:
                assert all(env.cells[c] == snake_mod.SNAKE + i for c in env.bodies[i])
        assert np.all(lengths <= 70)
        for i in np.flatnonzero(term | trunc):
            env.reset_agent(int(i))
            lengths[i] = 0


def test_snake_bit_identical_streams():
    a = _run(Snake(), 7, 1, 300)
    b = _run(Snake(), 7, 1, 300)
    assert len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


# --- tetris ---


def test_tetris_reset_and_bag():
    env = Tetris()
    obs = env.reset(RngStream(2))
    assert obs.shape == (1, 221)
    assert env.occupancy() == 0
    # draw many pieces: every aligned group of 7 is a permutation
    for _ in range(27):
        env._next_piece()
    hist = env.history
    for k in range(0, 28, 7):
        assert sorted(hist[k : k + 7]) == list(range(7))


def test_tetris_hard_drop_reward():
    env = Tetris()
    env.reset(RngStream(0))
    (res,) = env.step([tetris_mod.HARD_DROP])
    assert res.reward[1] == 0.02
    assert env.occupancy() == 4


def test_tetris_rotate_reward_only_when_rotated():
    env = Tetris()
    env.reset(RngStream(0))
    env.piece = tetris_mod.PIECE_NAMES.index("T")
    env.row, env.rot = 5, 0
    (res,) = env.step([tetris_mod.ROTATE])
    assert res.reward[2] == 0.01 and env.rot == 1
    # a vertical I against the right wall cannot turn flat
    env.piece = tetris_mod.PIECE_NAMES.index("I")
    env.rot = 1
    env.col = env.width - 1 - max(c for _, c in tetris_mod.PIECES[env.piece][1])
    (res,) = env.step([tetris_mod.ROTATE])
    assert res.reward[2] == 0.0 and env.rot == 1


def test_tetris_combo_reward_scales_with_lines():
    for k in range(1, 5):
        env = Tetris()
        env.reset(RngStream(0))
        h, w = env.height, env.width
        for r in range(h - k, h):
            env.board[r] = [1] * w
            env.board[r][0] = 0
        # a vertical I piece fills column 0 of the bottom rows
        env.piece = tetris_mod.PIECE_NAMES.index("I")
        env.rot = 1
        cells = tetris_mod.PIECES[env.piece][1]
        min_c = min(c for _, c in cells)
        env.col = -min_c
        env.row = 0
        (res,) = env.step([tetris_mod.HARD_DROP])
        assert res.reward[0] == pytest.approx(0.25 * k)
        assert env.last_clear == k


def test_tetris_gravity_schedule():
    env = Tetris()
    env.reset(RngStream(0))
    assert env.gravity == 8
    env.locked = 200
    assert env.gravity == 7
    env.locked = 10_000
    assert env.gravity == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_tetris_invariants(seed):
    env = Tetris(max_episode_steps=300, truncation_jitter=20)
    env.reset(RngStream(seed))
    g = np.random.default_rng(seed)
    length = 0
    for _ in range(600):
        obs, r, term, trunc = env.step_arrays(g.integers(6, size=1))
        length += 1
        assert env.last_clear in (0, 1, 2, 3, 4)
        assert r[0, 0] in (0.0, 0.25, 0.5, 0.75, 1.0)
        assert env.occupancy() <= env.width * env.height
        assert length <= 320
        assert not (term[0] and trunc[0])
        if term[0] or trunc[0]:
            env.reset_agent(0)
            length = 0


def test_tetris_bit_identical_streams():
    a = _run(Tetris(), 3, 9, 500)
    b = _run(Tetris(), 3, 9, 500)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_truncation_horizon_in_jitter_range():
    env = Snake(grid_size=30, num_agents=1, num_food=1, max_episode_steps=20, truncation_jitter=5)
    seen = set()
    for seed in range(40):
        env.reset(RngStream(seed))
        seen.add(int(env._horizons[0]))
    assert seen <= set(range(15, 26)) and len(seen) > 3


# --- scalar view, vector env, traces ---


def test_scalar_reward_view_sums():
    env = Snake(num_agents=1, num_food=1)
    view = scalar_reward_view(env)
    view.reset(RngStream(0))
    p = env.radius
    _place_single(env, (p, p + 3), 0)
    (res,) = view.step([0])
    assert res.reward.shape == (1,) and res.reward[0] == -1.0
    env2 = PreferenceBandit()
    view2 = scalar_reward_view(env2)
    view2.reset(RngStream(0))
    assert view2.step([2])[0].reward[0] == 1.0
    assert view.spec.objective_count == 1


@pytest.mark.parametrize("vec,total", [((0.1, 0, 0), 0.1), ((0, 0.01, -1.0), -0.99), ((0, 0, 0), 0.0)])
def test_scalar_sum_examples(vec, total):
    assert sum(vec) == pytest.approx(total, abs=1e-15)


def test_vector_env_autoreset_and_stats():
    venv = VectorEnv([PreferenceBandit() for _ in range(3)], gamma=0.9)
    venv.reset(RngStream(0))
    obs, r, term, trunc, final = venv.step([0, 1, 2])
    assert term.all() and obs.shape == (3, 1)
    eps = venv.pop_finished()
    assert [e.slot for e in eps] == [0, 1, 2]
    assert np.array_equal(eps[2].undiscounted, [0, 0, 1])
    # slots reset, so stepping again is legal
    venv.step([0, 0, 0])


def test_vector_env_tracks_components_for_scalar_view():
    venv = VectorEnv([scalar_reward_view(PreferenceBandit())], gamma=0.9)
    venv.reset(RngStream(0))
    _, r, *_ = venv.step([1])
    assert r.shape == (1, 1)
    (ep,) = venv.pop_finished()
    assert np.array_equal(ep.undiscounted, [0, 1, 0])


def test_vector_env_discounting():
    venv = VectorEnv([PreferenceBandit(sequential=True, horizon=3)], gamma=0.5)
    venv.reset(RngStream(0))
    for a in (0, 1, 2):
        venv.step([a])
    (ep,) = venv.pop_finished()
    assert np.allclose(ep.discounted, [1, 0.5, 0.25], atol=0)
    assert ep.length == 3


def test_trace_recorder(tmp_path):
    env = PreferenceBandit(sequential=True, horizon=2)
    env.reset(RngStream(0))
    rec = TraceRecorder(3)
    for t, a in enumerate((2, 0)):
        rec.record(t, [a], env.step([a]))
    path = tmp_path / "trace.csv"
    rec.write(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["step", "agent", "action", "reward_0", "reward_1", "reward_2", "terminated", "truncated"]
    assert rows[1][:3] == ["0", "0", "2"] and float(rows[1][5]) == 1.0
    assert rows[2][-2:] == ["0", "1"]


def test_lattice_on_bandit_is_optimal():
    for w in simplex_lattice(3, 30):
        v = preference_bandit_optimal_return(w)
        assert v.sum() == 1.0 and w[int(np.argmax(v))] == w.max()

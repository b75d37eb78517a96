import math

import numpy as np
import pytest
from helpers import ppo_gradient_error, small_network
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import finite_difference

from morl_control.core import RngStream
from morl_control.nn import (
    AdamState,
    NetworkConfig,
    PolicyCheckpoint,
    PolicyNetwork,
    adam_step,
    backward,
    clip_grad_norm,
    init_params,
    log_prob_entropy,
    log_softmax,
    sample_actions,
)
from morl_control.nn import autodiff as ad


# --- autodiff primitives ---


def test_affine_layer_gradient_is_input():
    x = np.array([[1.0, 2.0, 3.0]])
    W = ad.Tensor(np.zeros((3, 1)), requires_grad=True)
    b = ad.Tensor(np.zeros(1), requires_grad=True)
    loss = ad.tsum(ad.Tensor(x) @ W + b)
    gW, gb = backward(loss, [W, b])
    assert np.array_equal(gW[:, 0], x[0]) and gb.tolist() == [1.0]


def test_constant_loss_gradient_is_zero():
    p = ad.Tensor(np.ones(4), requires_grad=True)
    (g,) = backward(ad.Tensor(np.array(3.0)), [p])
    assert np.array_equal(g, np.zeros(4))


def test_backward_errors():
    with pytest.raises(RuntimeError):
        backward(None)
    with pytest.raises(TypeError):
        backward(np.array(1.0))
    with pytest.raises(ValueError):
        backward(ad.Tensor(np.ones(3), requires_grad=True))
    net = small_network(0)
    with pytest.raises(RuntimeError):
        net.gradient(ad.Tensor(np.array(0.0)))


@pytest.mark.parametrize(
    "op",
    [
        lambda a, b: ad.tsum(ad.tanh(a) * b),
        lambda a, b: ad.tsum(ad.relu(a) * b),
        lambda a, b: ad.mean(ad.exp(a) - ad.square(b)),
        lambda a, b: ad.tsum(ad.pick(ad.log_softmax(a), np.array([0, 2, 1]))),
        lambda a, b: ad.tsum(ad.minimum(a, b * 2.0)),
        lambda a, b: ad.tsum(ad.clip(a, -0.5, 0.5) * b),
        lambda a, b: ad.tsum(ad.concat([a, b], axis=1) @ ad.Tensor(np.arange(6.0).reshape(6, 1))),
        lambda a, b: ad.tsum(ad.tsum(a, axis=1) * ad.mean(b, axis=1)),
        lambda a, b: ad.tsum(-a + 3.0 - b),
    ],
)
def test_primitive_gradients_match_finite_differences(op):
    g = np.random.default_rng(1)
    a = ad.Tensor(g.normal(size=(3, 3)), requires_grad=True)
    b = ad.Tensor(g.normal(size=(3, 3)), requires_grad=True)
    analytic = backward(op(a, b), [a, b])
    for t, grad in zip((a, b), analytic):
        flat = t.data.reshape(-1)
        numeric = finite_difference(lambda: float(op(a, b).data), flat, 1e-6)
        assert np.allclose(grad.reshape(-1), numeric, atol=1e-6)


@pytest.mark.parametrize("activation", ["tanh", "relu"])
def test_ppo_loss_gradient_finite_differences(activation):
    for seed in range(3):
        assert ppo_gradient_error(seed, activation=activation) < 1e-4


# --- network ---


def test_zero_params_give_uniform_logits():
    cfg = NetworkConfig(5, 4, 3, (8,), condition_on_weights=True)
    net = PolicyNetwork(cfg, init_params(cfg, None))
    out = net.forward(np.ones(5), [0.2, 0.3, 0.5])
    assert np.all(out.action_logits == out.action_logits[0]) and np.array_equal(out.value, np.zeros(3))


def test_config_shapes_and_counts():
    cfg = NetworkConfig(6, 3, 3, (8, 8), condition_on_weights=True)
    assert cfg.effective_input == 9
    assert cfg.parameter_count() == (9 * 8 + 8) + (8 * 8 + 8) + (8 * 3 + 3) * 2
    with pytest.raises(ValueError):
        NetworkConfig(6, 3, activation="sigmoid")


def test_weight_argument_contract():
    cond = small_network(0, conditioned=True)
    plain = small_network(0, conditioned=False)
    obs = np.ones(6)
    with pytest.raises(ValueError):
        cond.forward(obs)
    with pytest.raises(ValueError):
        plain.forward(obs, [1, 0, 0])
    with pytest.raises(ValueError):
        cond.forward(obs, [0.5, 0.5])
    a = plain.forward(obs)
    b = plain.forward(obs)
    assert np.array_equal(a.action_logits, b.action_logits)


def test_conditioned_outputs_depend_on_weights():
    net = small_network(3)
    obs = np.ones(6)
    a = net.forward(obs, [1, 0, 0]).action_logits
    b = net.forward(obs, [0, 0, 1]).action_logits
    assert not np.array_equal(a, b)


def test_graph_and_numpy_forward_agree():
    net = small_network(4)
    obs = np.random.default_rng(0).normal(size=(5, 6))
    w = np.random.default_rng(1).dirichlet(np.ones(3), 5)
    logits, value = net.forward_graph(obs, w)
    out = net.forward(obs, w)
    assert np.allclose(logits.data, out.action_logits, atol=1e-14)
    assert np.allclose(value.data, out.value, atol=1e-14)


def test_orthogonal_init_gains():
    cfg = NetworkConfig(16, 4, 3, (16, 16))
    net = PolicyNetwork(cfg, rng=RngStream(0))
    views = dict(zip([n for n, _ in cfg.layer_shapes()], net.params.views()))
    W = views["hidden1.W"]
    assert np.allclose(W.T @ W, 2.0 * np.eye(16), atol=1e-10)
    assert np.all(views["hidden0.b"] == 0)
    assert np.abs(views["logits.W"]).max() < 0.02


# --- categorical helpers ---


def test_log_prob_entropy_examples():
    lp, ent = log_prob_entropy(np.zeros(4), 2)
    assert lp == pytest.approx(-math.log(4)) and ent == pytest.approx(math.log(4))
    lp, ent = log_prob_entropy([50.0, 0.0], 0)
    assert abs(lp) < 1e-20 and ent < 1e-18
    logits = np.array([0.3, -1.2, 2.0])
    assert log_prob_entropy(logits, 0)[1] == pytest.approx(log_prob_entropy(logits + 100.0, 0)[1], abs=1e-12)
    with pytest.raises(ValueError):
        log_prob_entropy(logits, 3)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=10))
def test_softmax_properties(logits):
    lp = log_softmax(logits)
    assert abs(np.exp(lp).sum() - 1) < 1e-12
    assert np.all(lp <= 0)


def test_sample_actions_distribution():
    logits = np.log(np.tile([0.2, 0.3, 0.5], (50_000, 1)))
    a = sample_actions(logits, RngStream(0))
    freq = np.bincount(a, minlength=3) / a.size
    assert np.allclose(freq, [0.2, 0.3, 0.5], atol=0.01)


# --- optimizer ---


def test_adam_zero_gradient_leaves_params():
    p = np.arange(4.0)
    new, state = adam_step(p, np.zeros(4), AdamState.zeros(4), lr=0.1)
    assert np.array_equal(new, p) and state.t == 1


def test_adam_first_step_by_hand():
    p = np.array([1.0, -2.0, 0.5])
    g = np.array([0.3, -4.0, 1e-3])
    lr, eps = 0.01, 1e-8
    new, _ = adam_step(p, g, AdamState.zeros(3), lr, eps=eps)
    # at t=1 the bias-corrected moments are g and g**2
    expected = p - lr * g / (np.abs(g) + eps)
    assert np.allclose(new, expected, atol=1e-15)


def test_adam_deterministic_and_length_check():
    p, g = np.ones(3), np.array([0.1, 0.2, 0.3])
    a = adam_step(p, g, AdamState.zeros(3), 0.01)
    b = adam_step(p, g, AdamState.zeros(3), 0.01)
    assert np.array_equal(a[0], b[0])
    a2 = adam_step(a[0], g, a[1], 0.01)
    b2 = adam_step(b[0], g, b[1], 0.01)
    assert np.array_equal(a2[0], b2[0])
    with pytest.raises(ValueError):
        adam_step(np.ones(3), np.ones(2), AdamState.zeros(3), 0.1)


def test_clip_grad_norm():
    g, norm = clip_grad_norm(np.array([3.0, 4.0]), 1.0)
    assert norm == 5.0 and np.linalg.norm(g) == pytest.approx(1.0, abs=1e-6)
    g, _ = clip_grad_norm(np.array([0.3, 0.4]), 1.0)
    assert g.tolist() == [0.3, 0.4]


# --- checkpoints ---


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    net = small_network(9)
    ck = PolicyCheckpoint(net.config, net.params, {"variant": "moppo", "gamma": 0.99})
    path = ck.save(tmp_path / "a.ckpt")
    back = PolicyCheckpoint.load(path)
    assert back.config == ck.config and back.metadata == ck.metadata
    assert back.params.flat.tobytes() == ck.params.flat.tobytes()
    assert back.to_bytes() == ck.to_bytes()
    blob = ck.to_bytes()
    assert blob[:8] == b"MOCKPT\x00\x01"


def test_checkpoint_rejects_bad_input():
    net = small_network(1)
    blob = PolicyCheckpoint(net.config, net.params).to_bytes()
    with pytest.raises(ValueError):
        PolicyCheckpoint.from_bytes(b"XXXXXXXX" + blob[8:])
    with pytest.raises(ValueError):
        PolicyCheckpoint.from_bytes(blob[:-8])


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=1))
@settings(max_examples=20)
def test_checkpoint_preserves_any_float(vals):
    cfg = NetworkConfig(1, 1, 1, (1,))
    params = init_params(cfg, None)
    params.flat[:] = vals[0]
    back = PolicyCheckpoint.from_bytes(PolicyCheckpoint(cfg, params).to_bytes())
    assert back.params.flat.tobytes() == params.flat.tobytes()

"""Feed-forward actor-critic with a categorical policy head and a vector value head."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import RngStream
from . import autodiff as ad

ACTIVATIONS = {"tanh": ad.tanh, "relu": ad.relu}


@dataclass(frozen=True)
class NetworkConfig:
    input_length: int
    action_count: int
    value_dim: int = 1
    hidden_sizes: tuple[int, ...] = (128, 128)
    activation: str = "tanh"
    condition_on_weights: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_length < 1 or self.action_count < 1 or self.value_dim < 1:
            raise ValueError("input_length, action_count and value_dim must be positive")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {sorted(ACTIVATIONS)}")

    @property
    def effective_input(self) -> int:
        """Trunk input width: observation, plus the weight vector when conditioned."""
        return self.input_length + (self.value_dim if self.condition_on_weights else 0)

    def layer_shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        shapes = []
        fan_in = self.effective_input
        for i, h in enumerate(self.hidden_sizes):
            shapes += [(f"hidden{i}.W", (fan_in, h)), (f"hidden{i}.b", (h,))]
            fan_in = h
        shapes += [("logits.W", (fan_in, self.action_count)), ("logits.b", (self.action_count,))]
        shapes += [("value.W", (fan_in, self.value_dim)), ("value.b", (self.value_dim,))]
        return shapes

    def parameter_count(self) -> int:
        return sum(int(np.prod(s)) for _, s in self.layer_shapes())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


@dataclass
class NetworkParams:
    """Flat float64 parameter vector plus a name/shape table."""

    flat: np.ndarray
    shapes: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)

    def views(self) -> list[np.ndarray]:
        out, offset = [], 0
        for _, shape in self.shapes:
            size = int(np.prod(shape))
            out.append(self.flat[offset : offset + size].reshape(shape))
            offset += size
        return out

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.flat.copy(), list(self.shapes))


@dataclass
class PolicyOutput:
    action_logits: np.ndarray
    value: np.ndarray


def _orthogonal(rng: RngStream, shape: tuple[int, int], gain: float) -> np.ndarray:
    rows, cols = shape
    a = rng.generator.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_params(config: NetworkConfig, rng: RngStream | None = None) -> NetworkParams:
    """Orthogonal init: gain sqrt(2) hidden, 0.01 logits, 1.0 value, zero biases.

    ``rng=None`` gives all-zero parameters.
    """
    shapes = config.layer_shapes()
    params = NetworkParams(np.zeros(config.parameter_count()), shapes)
    if rng is None:
        return params
    for (name, shape), view in zip(shapes, params.views()):
        if name.endswith(".b"):
            continue
        gain = 0.01 if name.startswith("logits") else 1.0 if name.startswith("value") else np.sqrt(2.0)
        view[...] = _orthogonal(rng, shape, gain)
    return params


class PolicyNetwork:
    """Shared trunk feeding a logits head and a ``value_dim`` value head."""

    def __init__(self, config: NetworkConfig, params: NetworkParams | None = None, rng: RngStream | None = None):
        self.config = config
        self.params = params if params is not None else init_params(config, rng)
        if self.params.flat.size != config.parameter_count():
            raise ValueError(
                f"parameter count {self.params.flat.size} does not match config ({config.parameter_count()})"
            )
        self._leaves: list[ad.Tensor] | None = None

    def _inputs(self, obs, weights) -> np.ndarray:
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        if obs.shape[1] != self.config.input_length:
            raise ValueError(f"observation length {obs.shape[1]} != {self.config.input_length}")
        if self.config.condition_on_weights:
            if weights is None:
                raise ValueError("this network is weight-conditioned; a weight vector is required")
            w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
            if w.shape[1] != self.config.value_dim:
                raise ValueError(f"weight length {w.shape[1]} != {self.config.value_dim}")
            w = np.broadcast_to(w, (obs.shape[0], w.shape[1]))
            return np.concatenate([obs, w], axis=1)
        if weights is not None:
            raise ValueError("this network is not weight-conditioned; do not pass weights")
        return obs

    def forward_graph(self, obs, weights=None) -> tuple[ad.Tensor, ad.Tensor]:
        """Differentiable forward pass; leaves are kept for ``gradient``."""
        x = ad.Tensor(self._inputs(obs, weights))
        leaves = [ad.Tensor(v, requires_grad=True) for v in self.params.views()]
        act = ACTIVATIONS[self.config.activation]
        h = x
        n_hidden = len(self.config.hidden_sizes)
        for i in range(n_hidden):
            h = act(h @ leaves[2 * i] + leaves[2 * i + 1])
        k = 2 * n_hidden
        logits = h @ leaves[k] + leaves[k + 1]
        value = h @ leaves[k + 2] + leaves[k + 3]
        self._leaves = leaves
        return logits, value

    def gradient(self, loss: ad.Tensor) -> np.ndarray:
        """Flat gradient of ``loss`` aligned with ``params.flat``."""
        if self._leaves is None:
            raise RuntimeError("gradient() called without a preceding forward_graph()")
        grads = ad.backward(loss, self._leaves)
        self._leaves = None
        return np.concatenate([g.reshape(-1) for g in grads])

    def forward(self, obs, weights=None) -> PolicyOutput:
        """Plain numpy forward pass (no graph). Accepts one observation or a batch."""
        single = np.asarray(obs).ndim == 1
        x = self._inputs(obs, weights)
        views = self.params.views()
        act = np.tanh if self.config.activation == "tanh" else (lambda z: np.maximum(z, 0.0))
        h = x
        n_hidden = len(self.config.hidden_sizes)
        for i in range(n_hidden):
            h = act(h @ views[2 * i] + views[2 * i + 1])
        k = 2 * n_hidden
        logits = h @ views[k] + views[k + 1]
        value = h @ views[k + 2] + views[k + 3]
        if single:
            return PolicyOutput(logits[0], value[0])
        return PolicyOutput(logits, value)


def log_softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def log_prob_entropy(logits, action_id) -> tuple[float, float]:
    """Log-probability of ``action_id`` and entropy of the categorical over ``logits``."""
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    if not (0 <= action_id < logits.size):
        raise ValueError(f"action {action_id} outside [0, {logits.size})")
    lp = log_softmax(logits)
    p = np.exp(lp)
    entropy = float(-np.sum(np.where(p > 0, p * lp, 0.0)))
    return float(lp[action_id]), entropy


def sample_actions(logits: np.ndarray, rng: RngStream) -> np.ndarray:
    """Categorical sampling via the Gumbel-max trick (one draw per row)."""
    g = rng.generator.gumbel(size=logits.shape)
    return np.argmax(logits + g, axis=-1)

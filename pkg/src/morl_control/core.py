"""Objective/weight vectors, simplex sampling and lattices, discounted returns."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-9


def objective_vector(values: Iterable[float]) -> np.ndarray:
    """Validate and return a float64 objective vector."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size < 1:
        raise ValueError("objective vector must have at least one component")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"objective vector has non-finite entries: {v}")
    return v


def weight_vector(values: Iterable[float]) -> np.ndarray:
    """Validate and return a float64 point on the simplex."""
    w = np.asarray(values, dtype=np.float64).reshape(-1)
    if w.size < 1:
        raise ValueError("weight vector must have at least one component")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError(f"weight vector entries must be finite and >= 0: {w}")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weight vector must sum to 1, got {w.sum()!r}")
    return w


def is_weight_vector(w: Sequence[float]) -> bool:
    try:
        weight_vector(w)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class DiscountSpec:
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError(f"discount must lie in [0, 1), got {self.gamma}")


class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    Two streams built from the same pair produce the same draws. Different
    stream ids give statistically independent streams for the same seed.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed < 2**64 and 0 <= stream_id < 2**64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, stream_id: int) -> "RngStream":
        """Derive an independent child stream; the parent is not advanced."""
        mixed = (self.stream_id * 0x9E3779B97F4A7C15 + stream_id + 1) % 2**64
        return RngStream(self.seed, mixed)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def random(self, size=None):
        return self.generator.random(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def scalarize(v: Sequence[float], w: Sequence[float]) -> float:
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if v.shape[-1] != w.shape[-1]:
        raise ValueError(
            f"dimension mismatch: objective vector has length {v.shape[-1]}, "
            f"weight vector has length {w.shape[-1]}"
        )
    return float(np.dot(v, w))


def sample_simplex_uniform(rng: RngStream, dim: int) -> np.ndarray:
    """Uniform draw from the (dim-1)-simplex via normalized unit exponentials."""
    if dim < 1:
        raise ValueError(f"simplex dimension must be >= 1, got {dim}")
    if dim == 1:
        return np.ones(1)
    e = rng.generator.standard_exponential(dim)
    return e / e.sum()


def lattice_size(dim: int, granularity: int) -> int:
    return math.comb(granularity + dim - 1, dim - 1)


def lattice_granularity(dim: int, n_target: int) -> int:
    """Granularity H whose lattice size is closest to ``n_target`` (smaller H on ties)."""
    if dim == 1:
        return 1
    best_h, best_gap = 1, abs(lattice_size(dim, 1) - n_target)
    h = 1
    while True:
        h += 1
        size = lattice_size(dim, h)
        gap = abs(size - n_target)
        if gap < best_gap:
            best_h, best_gap = h, gap
        if size >= n_target:
            break
    return best_h


def _compositions(total: int, parts: int):
    # descending lexicographic order
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def simplex_lattice(dim: int, n_target: int) -> list[np.ndarray]:
    """Evenly spaced simplex weights ``{h/H : sum(h) = H}``.

    ``H`` is picked so the point count is as close as possible to
    ``n_target``. Points come out sorted lexicographically descending.
    """
    if dim < 1 or n_target < 1:
        raise ValueError(f"need dim >= 1 and n_target >= 1, got {dim}, {n_target}")
    h = lattice_granularity(dim, n_target)
    return [np.array(c, dtype=np.float64) / h for c in _compositions(h, dim)]


def discounted_return(rewards: Sequence[Sequence[float]], spec: DiscountSpec | float) -> np.ndarray:
    """Sum of ``gamma**t * r_t``, accumulated back to front in float64."""
    gamma = spec.gamma if isinstance(spec, DiscountSpec) else DiscountSpec(float(spec)).gamma
    r = np.asarray(rewards, dtype=np.float64)
    if r.shape[0] == 0:
        raise ValueError("cannot compute the return of an empty reward sequence")
    if r.ndim == 1:
        r = r[:, None]
    acc = np.zeros(r.shape[1])
    for t in range(r.shape[0] - 1, -1, -1):
        acc = r[t] + gamma * acc
    return acc

"""Solution-set indicators for multi-objective agents.

All objectives are maximized. Undefined quantities (e.g. a rank
correlation against a constant sequence) are reported as ``nan``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

UNDEFINED = math.nan


@dataclass
class SolutionSet:
    """Evaluation pairs ``(weight, return)`` for one algorithm."""

    algorithm: str
    weights: np.ndarray
    returns: np.ndarray

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        self.returns = np.atleast_2d(np.asarray(self.returns, dtype=np.float64))
        if self.weights.shape != self.returns.shape:
            raise ValueError(
                f"weights {self.weights.shape} and returns {self.returns.shape} must have equal shapes"
            )

    @classmethod
    def from_pairs(cls, algorithm: str, pairs: Iterable[tuple[Sequence[float], Sequence[float]]]):
        pairs = list(pairs)
        return cls(algorithm, [w for w, _ in pairs], [v for _, v in pairs])

    @property
    def dim(self) -> int:
        return self.returns.shape[1]

    def __len__(self):
        return self.returns.shape[0]

    @property
    def entries(self):
        return list(zip(self.weights, self.returns))


@dataclass(frozen=True)
class NormalizationRange:
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        if np.any(self.low > self.high):
            raise ValueError("normalization range needs min <= max per objective")


@dataclass
class ControllabilityReport:
    method: str
    rho: np.ndarray
    p_value: np.ndarray
    aggregate: float = field(init=False)

    def __post_init__(self):
        defined = ~np.isnan(self.rho)
        self.aggregate = float(self.rho[defined].sum())

    def significant(self, threshold: float = 0.001) -> np.ndarray:
        return ~np.isnan(self.p_value) & (self.p_value < threshold)


def _check_dims(a: np.ndarray, b: np.ndarray):
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


# --- Pareto dominance -------------------------------------------------------


def dominates(a, b) -> bool:
    """True when ``a`` is at least as good everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return bool(np.all(a >= b) and np.any(a > b))


def pareto_filter(points) -> np.ndarray:
    """Non-dominated subset of ``points``, one copy per distinct point.

    Points are visited in descending lexicographic order, so nothing seen
    later can dominate anything already kept; each candidate only needs
    checking against the current front.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[0] == 0 or pts.size == 0:
        raise ValueError("cannot filter an empty point set")
    order = np.lexsort(pts.T[::-1])[::-1]
    front = np.empty_like(pts)
    size = 0
    for idx in order:
        p = pts[idx]
        if size:
            kept = front[:size]
            if np.any(np.all(kept >= p, axis=1)):
                # dominated, or a duplicate of a kept point
                continue
        front[size] = p
        size += 1
    return front[:size].copy()


# --- hypervolume ------------------------------------------------------------


def _hv_sweep_2d(pts: np.ndarray, ref: np.ndarray) -> float:
    order = np.argsort(-pts[:, 0], kind="stable")
    area = 0.0
    top = ref[1]
    for x, y in pts[order]:
        if y > top:
            area += (x - ref[0]) * (y - top)
            top = y
    return float(area)


def _hv_slicing(pts: np.ndarray, ref: np.ndarray) -> float:
    if pts.shape[0] == 0:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts[:, 0].max() - ref[0])
    last = pts[:, -1]
    levels = np.unique(last)
    volume = 0.0
    below = ref[-1]
    for z in levels:
        active = pts[last >= z, :-1]
        volume += _hv_slicing(active, ref[:-1]) * (z - below)
        below = z
    return float(volume)


def hypervolume(front, ref, method: str = "auto") -> float:
    """Volume of the union of boxes ``[ref, v]`` over the front.

    Coordinates are clipped to the reference point first, so points not
    strictly above it add nothing. ``method`` is ``"sweep"`` (2-D only),
    ``"slicing"`` (any dimension) or ``"auto"``.
    """
    pts = np.atleast_2d(np.asarray(front, dtype=np.float64))
    ref = np.asarray(ref, dtype=np.float64).reshape(-1)
    _check_dims(pts, ref)
    pts = pts[np.all(pts > ref, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    if method == "auto":
        method = "sweep" if ref.size == 2 else "slicing"
    if method == "sweep":
        if ref.size != 2:
            raise ValueError("the sorted sweep only handles two objectives")
        return _hv_sweep_2d(pts, ref)
    if method == "slicing":
        return _hv_slicing(pts, ref)
    raise ValueError(f"unknown hypervolume method {method!r}")


# --- spread and utility -----------------------------------------------------


def sparsity(front) -> float:
    pts = np.atleast_2d(np.asarray(front, dtype=np.float64))
    n = pts.shape[0]
    if n < 2:
        return 0.0
    gaps = np.diff(np.sort(pts, axis=0), axis=0)
    return float(np.sum(gaps**2) / (n - 1))


def utilities_per_weight(solutions, weights) -> np.ndarray:
    """Best scalarized value in ``solutions`` for each weight."""
    v = np.atleast_2d(np.asarray(solutions, dtype=np.float64))
    w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    if v.size == 0 or w.size == 0:
        raise ValueError("expected utility needs solutions and weights")
    _check_dims(v, w)
    # elementwise products summed per pair, so each value does not depend on the set size
    return (v[:, None, :] * w[None, :, :]).sum(axis=2).max(axis=0)


def expected_utility(solutions, weights) -> float:
    return float(utilities_per_weight(solutions, weights).mean())


@dataclass(frozen=True)
class CosineStats:
    mean: float
    std: float
    skipped: int


def cosine_alignment(pairs: SolutionSet, norm_range: NormalizationRange | None = None) -> CosineStats:
    """Mean and population std of ``cos(w, v)`` over evaluation pairs.

    Returns are normalized with ``norm_range`` when given. Pairs whose
    return has zero norm are skipped and counted.
    """
    v = pairs.returns if norm_range is None else normalize(pairs.returns, norm_range)
    w = pairs.weights
    vn = np.linalg.norm(v, axis=1)
    wn = np.linalg.norm(w, axis=1)
    ok = (vn > 0) & (wn > 0)
    skipped = int((~ok).sum())
    if not ok.any():
        return CosineStats(UNDEFINED, UNDEFINED, skipped)
    cos = np.sum(w[ok] * v[ok], axis=1) / (wn[ok] * vn[ok])
    return CosineStats(float(cos.mean()), float(cos.std()), skipped)


# --- rank statistics --------------------------------------------------------


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("cannot rank an empty sequence")
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    ranks = np.empty(x.size)
    start = 0
    n = x.size
    while start < n:
        stop = start + 1
        while stop < n and sorted_x[stop] == sorted_x[start]:
            stop += 1
        # positions start..stop-1 hold ranks start+1..stop
        ranks[order[start:stop]] = 0.5 * (start + 1 + stop)
        start = stop
    return ranks


def _paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise ValueError(f"rank correlation needs at least 3 pairs, got {x.size}")
    return x, y


def spearman(x, y) -> tuple[float, float]:
    """Spearman's rho with a two-sided t-approximation p-value.

    Returns ``(nan, nan)`` when either input has zero rank variance.
    """
    x, y = _paired(x, y)
    rx = average_ranks(x)
    ry = average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        return UNDEFINED, UNDEFINED
    rho = float(np.dot(dx, dy) / math.sqrt(sxx * syy))
    rho = min(1.0, max(-1.0, rho))
    n = x.size
    if abs(rho) >= 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return rho, min(1.0, p)


def _tie_sums(v: np.ndarray) -> tuple[float, float, float]:
    _, counts = np.unique(v, return_counts=True)
    t = counts.astype(np.float64)
    return (
        float(np.sum(t * (t - 1) / 2)),
        float(np.sum(t * (t - 1) * (2 * t + 5))),
        float(np.sum(t * (t - 1) * (t - 2))),
    )


def kendall_tau(x, y) -> tuple[float, float]:
    """Kendall's tau-b with a two-sided normal-approximation p-value."""
    x, y = _paired(x, y)
    n = x.size
    sx = np.sign(x[:, None] - x[None, :])
    sy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(n, k=1)
    s = float(np.sum(sx[iu] * sy[iu]))
    n0 = n * (n - 1) / 2
    tx, vx, wx = _tie_sums(x)
    ty, vy, wy = _tie_sums(y)
    denom = math.sqrt((n0 - tx) * (n0 - ty))
    if denom == 0:
        return UNDEFINED, UNDEFINED
    tau = min(1.0, max(-1.0, s / denom))
    var = (n * (n - 1) * (2 * n + 5) - vx - vy) / 18.0
    var += wx * wy / (9.0 * n * (n - 1) * (n - 2))
    var += (2 * tx) * (2 * ty) / (2.0 * n * (n - 1))
    if var <= 0:
        return tau, UNDEFINED
    z = s / math.sqrt(var)
    p = float(2.0 * stats.norm.sf(abs(z)))
    return tau, min(1.0, p)


RANK_METHODS: dict[str, Callable] = {"spearman": spearman, "kendall": kendall_tau}


def controllability(solutions: SolutionSet, method: str | Callable = "spearman") -> ControllabilityReport:
    """Per-objective rank correlation between weight and raw return components.

    ``method`` names a built-in coefficient or is any callable
    ``f(weights_d, returns_d) -> (coefficient, p_value)``.
    """
    if len(solutions) < 3:
        raise ValueError("controllability needs at least 3 evaluation pairs")
    if callable(method):
        f, name = method, getattr(method, "__name__", "custom")
    else:
        try:
            f, name = RANK_METHODS[method], method
        except KeyError:
            raise ValueError(f"unknown rank method {method!r}") from None
    d = solutions.dim
    rho = np.full(d, UNDEFINED)
    pv = np.full(d, UNDEFINED)
    for k in range(d):
        rho[k], pv[k] = f(solutions.weights[:, k], solutions.returns[:, k])
    return ControllabilityReport(name, rho, pv)


# --- normalization ----------------------------------------------------------


def minmax_range(sets: Sequence[SolutionSet]) -> NormalizationRange:
    if not sets:
        raise ValueError("need at least one solution set")
    allv = np.concatenate([s.returns for s in sets], axis=0)
    return NormalizationRange(allv.min(axis=0), allv.max(axis=0))


def normalize(v, norm_range: NormalizationRange) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    _check_dims(v, norm_range.low)
    span = norm_range.high - norm_range.low
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (v - norm_range.low) / safe, 0.0)


def denormalize(v, norm_range: NormalizationRange) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return norm_range.low + v * (norm_range.high - norm_range.low)


def normalize_set(solutions: SolutionSet, norm_range: NormalizationRange) -> SolutionSet:
    return SolutionSet(solutions.algorithm, solutions.weights, normalize(solutions.returns, norm_range))


def nadir_reference(sets: Sequence[SolutionSet], offset: float = 0.1) -> np.ndarray:
    """Per-objective minimum over all (already normalized) returns, minus ``offset``."""
    if not sets:
        raise ValueError("need at least one solution set")
    allv = np.concatenate([s.returns for s in sets], axis=0)
    return allv.min(axis=0) - offset


# --- file format ------------------------------------------------------------


def write_solution_sets(path, sets: Sequence[SolutionSet]):
    if not sets:
        raise ValueError("nothing to write")
    d = sets[0].dim
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["algorithm", "batch", *[f"w_{k}" for k in range(d)], *[f"v_{k}" for k in range(d)]])
        for s in sets:
            for b, (wt, v) in enumerate(s.entries):
                w.writerow([s.algorithm, b, *map(repr, map(float, wt)), *map(repr, map(float, v))])


def read_solution_sets(path) -> list[SolutionSet]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = [h.strip() for h in next(reader)]
        if header[:2] != ["algorithm", "batch"]:
            raise ValueError(f"{path}: not a solution-set file (header {header[:2]})")
        d = (len(header) - 2) // 2
        if len(header) != 2 + 2 * d or header[2:] != [f"w_{k}" for k in range(d)] + [f"v_{k}" for k in range(d)]:
            raise ValueError(f"{path}: malformed solution-set header")
        grouped: dict[str, list] = {}
        for row in reader:
            if not row:
                continue
            vals = [float(x) for x in row[2:]]
            grouped.setdefault(row[0].strip(), []).append((int(row[1]), vals[:d], vals[d:]))
    out = []
    for name, rows in grouped.items():
        rows.sort(key=lambda r: r[0])
        out.append(SolutionSet(name, [r[1] for r in rows], [r[2] for r in rows]))
    return out

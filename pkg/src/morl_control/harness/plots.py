"""Per-objective weight/return scatter exports (CSV and a minimal SVG)."""

from __future__ import annotations

import csv
from html import escape

import numpy as np

from .evaluation import EvaluationRecord


def scatter_rows(record: EvaluationRecord) -> list[tuple[int, float, float]]:
    """``(objective, w_d, mean_return_d)`` for every objective and weight point."""
    rows = []
    for d in range(record.weights.shape[1]):
        for w, v in zip(record.weights[:, d], record.returns[:, d]):
            rows.append((d, float(w), float(v)))
    return rows


def write_scatter_csv(path, record: EvaluationRecord):
    with open(path, "w", newline="") as f:
        out = csv.writer(f)
        out.writerow(["algorithm", "objective", "w_d", "mean_return_d"])
        for d, w, v in scatter_rows(record):
            out.writerow([record.algorithm, d, repr(w), repr(v)])


def baseline_band(record: EvaluationRecord, objective: int) -> tuple[float, float]:
    """Mean and population std of one objective's returns across weight points."""
    v = record.returns[:, objective]
    return float(v.mean()), float(v.std())


def render_svg(
    record: EvaluationRecord,
    baselines: list[EvaluationRecord] = (),
    objective_names=None,
    panel: int = 220,
) -> str:
    """One panel per objective: points for ``record``, shaded mean ± std bands for baselines."""
    d = record.weights.shape[1]
    names = list(objective_names or [f"objective {k}" for k in range(d)])
    pad = 30
    width, height = d * (panel + pad) + pad, panel + 2 * pad
    colors = ["#d95f02", "#7570b3", "#1b9e77", "#e7298a"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    ]
    for k in range(d):
        x0 = pad + k * (panel + pad)
        vals = [record.returns[:, k]] + [b.returns[:, k] for b in baselines]
        lo = min(float(np.min(v)) for v in vals)
        hi = max(float(np.max(v)) for v in vals)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5

        def sy(v, lo=lo, hi=hi):
            return pad + panel * (1 - (v - lo) / (hi - lo))

        def sx(w, x0=x0):
            return x0 + panel * w

        parts.append(f'<rect x="{x0}" y="{pad}" width="{panel}" height="{panel}" fill="none" stroke="#333"/>')
        for i, b in enumerate(baselines):
            mean, std = baseline_band(b, k)
            top, bottom = sy(mean + std), sy(mean - std)
            color = colors[(i + 1) % len(colors)]
            parts.append(
                f'<rect x="{x0}" y="{top:.2f}" width="{panel}" height="{max(bottom - top, 0.0):.2f}" '
                f'fill="{color}" fill-opacity="0.25"><title>{escape(b.algorithm)}</title></rect>'
            )
            parts.append(
                f'<line x1="{x0}" x2="{x0 + panel}" y1="{sy(mean):.2f}" y2="{sy(mean):.2f}" stroke="{color}"/>'
            )
        for w, v in zip(record.weights[:, k], record.returns[:, k]):
            parts.append(f'<circle cx="{sx(w):.2f}" cy="{sy(v):.2f}" r="3" fill="{colors[0]}"/>')
        parts.append(f'<text x="{x0 + panel / 2}" y="{pad - 8}" text-anchor="middle">{escape(names[k])}</text>')
        parts.append(f'<text x="{x0 + panel / 2}" y="{pad + panel + 20}" text-anchor="middle">weight</text>')
        parts.append(f'<text x="{x0}" y="{pad + panel + 12}">0</text>')
        parts.append(f'<text x="{x0 + panel - 6}" y="{pad + panel + 12}">1</text>')
        parts.append(f'<text x="{x0 + 2}" y="{pad + 12}">{hi:.3g}</text>')
        parts.append(f'<text x="{x0 + 2}" y="{pad + panel - 4}">{lo:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_scatter(record: EvaluationRecord, csv_path, svg_path=None, baselines=(), objective_names=None):
    write_scatter_csv(csv_path, record)
    if svg_path is not None:
        with open(svg_path, "w") as f:
            f.write(render_svg(record, list(baselines), objective_names))
    return scatter_rows(record)

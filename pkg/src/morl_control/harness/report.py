"""Table-style evaluation reports over one environment's records."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .. import metrics as M
from .evaluation import EvalConfig, EvaluationRecord


@dataclass
class ReportRow:
    algorithm: str
    hv: float
    sp: float
    eu_mean: float
    eu_std: float
    cs_mean: float
    cs_std: float
    rho: list[float]
    p_value: list[float]
    significant: list[bool]
    front_size: int = 0


def build_report(records: list[EvaluationRecord], config: EvalConfig | None = None) -> list[ReportRow]:
    """Score each record; normalization and the HV reference are shared by all of them.

    HV, SP and CS use min-max normalized returns (range over all records),
    EU uses raw returns unless ``config.eu_normalized``, and the rank
    correlations use raw returns of weight-conditioned algorithms only.
    """
    config = config or EvalConfig()
    if not records:
        raise ValueError("need at least one evaluation record")
    dims = {r.returns.shape[1] for r in records}
    if len(dims) != 1:
        raise ValueError(f"records disagree on objective count: {sorted(dims)}")
    d = dims.pop()
    sets = [r.solution_set() for r in records]
    rng = M.minmax_range(sets)
    normed = [M.normalize_set(s, rng) for s in sets]
    ref = M.nadir_reference(normed, config.hv_offset)
    rows = []
    for rec, raw, norm in zip(records, sets, normed):
        front = M.pareto_filter(norm.returns)
        eu_src = norm.returns if config.eu_normalized else raw.returns
        utilities = M.utilities_per_weight(eu_src, raw.weights)
        cs = M.cosine_alignment(norm)
        if rec.conditioned and len(raw) >= 3:
            ctrl = M.controllability(raw, "spearman")
            rho, pv = ctrl.rho.tolist(), ctrl.p_value.tolist()
            sig = ctrl.significant(config.significance_threshold).tolist()
        else:
            rho, pv, sig = [M.UNDEFINED] * d, [M.UNDEFINED] * d, [False] * d
        rows.append(
            ReportRow(
                algorithm=rec.algorithm,
                hv=M.hypervolume(front, ref),
                sp=M.sparsity(front),
                eu_mean=float(utilities.mean()),
                eu_std=float(utilities.std()),
                cs_mean=cs.mean,
                cs_std=cs.std,
                rho=rho,
                p_value=pv,
                significant=sig,
                front_size=len(front),
            )
        )
    return rows


def _fmt(x: float) -> str:
    return repr(float(x))


def write_report_csv(path, rows: list[ReportRow]):
    d = len(rows[0].rho)
    header = ["algorithm", "hv", "sp", "eu_mean", "eu_std", "cs_mean", "cs_std"]
    header += [f"rho_{k}" for k in range(d)] + [f"p_{k}" for k in range(d)] + [f"sig_{k}" for k in range(d)]
    header += ["front_size"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            w.writerow(
                [r.algorithm, *map(_fmt, (r.hv, r.sp, r.eu_mean, r.eu_std, r.cs_mean, r.cs_std))]
                + [_fmt(x) for x in r.rho]
                + [_fmt(x) for x in r.p_value]
                + [int(s) for s in r.significant]
                + [r.front_size]
            )


def read_report_csv(path) -> list[ReportRow]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        d = sum(1 for k in reader.fieldnames if k.startswith("rho_"))
        out = []
        for row in reader:
            out.append(
                ReportRow(
                    algorithm=row["algorithm"],
                    hv=float(row["hv"]),
                    sp=float(row["sp"]),
                    eu_mean=float(row["eu_mean"]),
                    eu_std=float(row["eu_std"]),
                    cs_mean=float(row["cs_mean"]),
                    cs_std=float(row["cs_std"]),
                    rho=[float(row[f"rho_{k}"]) for k in range(d)],
                    p_value=[float(row[f"p_{k}"]) for k in range(d)],
                    significant=[row[f"sig_{k}"] == "1" for k in range(d)],
                    front_size=int(row["front_size"]),
                )
            )
    return out


def _pm(mean: float, std: float) -> str:
    if math.isnan(mean):
        return "n/a"
    return f"{mean:.3f} ± {std:.3f}"


def format_markdown(rows: list[ReportRow], objective_names=None) -> str:
    """Aligned Markdown table: HV, SP (x1e-3), EU, CS, then one rho column per objective."""
    d = len(rows[0].rho)
    names = list(objective_names or [f"obj{k}" for k in range(d)])
    header = ["Algorithm", "HV ↑", "SP (1e-3) ↓", "EU ↑", "CS ↑"] + [f"ρ {n} ↑" for n in names]
    body = []
    for r in rows:
        rho_cells = []
        for x, s in zip(r.rho, r.significant):
            rho_cells.append("n/a" if math.isnan(x) else f"{x:.3f}{'*' if s else ''}")
        body.append(
            [r.algorithm, f"{r.hv:.4f}", f"{r.sp * 1e3:.3f}", _pm(r.eu_mean, r.eu_std), _pm(r.cs_mean, r.cs_std)]
            + rho_cells
        )
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(header)]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    out = [line(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out += [line(b) for b in body]
    return "\n".join(out) + "\n"


def rows_equal(a: list[ReportRow], b: list[ReportRow]) -> bool:
    """Bit-level equality (NaN equals NaN)."""
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        va = np.array([x.hv, x.sp, x.eu_mean, x.eu_std, x.cs_mean, x.cs_std, *x.rho, *x.p_value])
        vb = np.array([y.hv, y.sp, y.eu_mean, y.eu_std, y.cs_mean, y.cs_std, *y.rho, *y.p_value])
        if x.algorithm != y.algorithm or va.tobytes() != vb.tobytes() or x.significant != y.significant:
            return False
    return True

"""Flat ``section.key = value`` run configuration and the pipeline runner."""

from __future__ import annotations

import inspect
import json
import logging
from dataclasses import fields
from pathlib import Path

from ..core import RngStream
from ..envs import ENVIRONMENTS
from ..moppo import AlgorithmVariant, TrainConfig, train, write_log
from ..nn import PolicyCheckpoint
from .demo import dynamic_demo, parse_schedule, write_demo_csv
from .evaluation import EvalConfig, evaluate, read_records, write_records
from .plots import export_scatter
from .report import build_report, format_markdown, write_report_csv

log = logging.getLogger(__name__)

STAGES = ("train", "evaluate", "report", "scatter", "demo")


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _optional(conv):
    def parse(text):
        return None if text.strip().lower() in ("none", "null", "") else conv(text)

    return parse


_BY_ANNOTATION = {
    "int": int,
    "float": float,
    "bool": _bool,
    "str": str,
    "float | None": _optional(float),
    "int | None": _optional(int),
    "tuple[int, ...]": lambda t: tuple(int(x) for x in _str_list(t)),
}


def _dataclass_schema(cls, skip=()) -> dict:
    return {f.name: _BY_ANNOTATION[str(f.type)] for f in fields(cls) if f.name not in skip}


SCHEMA = {
    "run": {"stages": _str_list, "seed": int, "out": str},
    "env": {"name": str},
    "train": {"variants": _str_list, **_dataclass_schema(TrainConfig, skip=("seed",))},
    "evaluate": {"checkpoints": _str_list, **_dataclass_schema(EvalConfig, skip=("seed",))},
    "report": {"records": _str_list},
    "scatter": {"svg": _bool, "baselines": _str_list},
    "demo": {
        "schedule": str,
        "horizon": int,
        "checkpoint": str,
        "deterministic": _bool,
        "initial_weight": lambda t: [float(x) for x in _str_list(t)],
    },
}

DEFAULTS = {
    "run.seed": 0,
    "run.out": "runs/default",
    "train.variants": ["moppo"],
    "scatter.svg": True,
    "scatter.baselines": [],
    "demo.deterministic": False,
}


def _env_converters(name: str) -> dict:
    cls = ENVIRONMENTS.get(name)
    if cls is None:
        raise ConfigError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}")
    out = {}
    for pname, p in inspect.signature(cls.__init__).parameters.items():
        if pname == "self":
            continue
        default = p.default
        conv = _bool if isinstance(default, bool) else type(default) if default is not inspect.Parameter.empty else str
        out[pname] = conv
    return out


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``section.key = value`` lines; unknown keys are errors."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got {line!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip().strip('"').strip("'")
    return convert(raw)


def convert(raw: dict[str, str]) -> dict:
    env_name = raw.get("env.name")
    env_schema = _env_converters(env_name) if env_name else {}
    unknown, out = [], {}
    for key, value in raw.items():
        section, _, name = key.partition(".")
        if section == "env" and name in env_schema:
            conv = env_schema[name]
        elif section in SCHEMA and name in SCHEMA[section]:
            conv = SCHEMA[section][name]
        else:
            unknown.append(key)
            continue
        try:
            out[key] = conv(value) if isinstance(value, str) else value
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({e})") from None
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return out


def resolve(cfg: dict) -> dict:
    """Fill defaults and check that every key the chosen stages need is present."""
    full = dict(DEFAULTS)
    full.update(cfg)
    missing = []
    if "run.stages" not in full:
        missing.append("run.stages")
    stages = full.get("run.stages", [])
    bad = [s for s in stages if s not in STAGES]
    if bad:
        raise ConfigError(f"unknown stages {bad}; choose from {list(STAGES)}")
    if any(s in stages for s in ("train", "evaluate", "demo")) and "env.name" not in full:
        missing.append("env.name")
    if "evaluate" in stages and "train" not in stages and "evaluate.checkpoints" not in full:
        missing.append("evaluate.checkpoints")
    if any(s in stages for s in ("report", "scatter")) and "evaluate" not in stages and "report.records" not in full:
        missing.append("report.records")
    if "demo" in stages:
        missing += [k for k in ("demo.schedule", "demo.horizon") if k not in full]
        if "train" not in stages and "demo.checkpoint" not in full:
            missing.append("demo.checkpoint")
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    for v in full.get("train.variants", []):
        AlgorithmVariant.parse(v)
    return full


def load_config(path) -> dict:
    path = Path(path)
    return resolve(parse_config_text(path.read_text(), str(path)))


def _format_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ", ".join(str(x) for x in v)
    return str(v)


def dump_config(cfg: dict) -> str:
    return "".join(f"{k} = {_format_value(cfg[k])}\n" for k in sorted(cfg))


def _section(cfg: dict, section: str) -> dict:
    prefix = section + "."
    return {k[len(prefix):]: v for k, v in cfg.items() if k.startswith(prefix)}


def run_config(cfg_or_path) -> dict:
    """Execute the configured stages in pipeline order; returns the produced artifact paths."""
    cfg = load_config(cfg_or_path) if isinstance(cfg_or_path, (str, Path)) else resolve(cfg_or_path)
    out = Path(cfg["run.out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved").write_text(dump_config(cfg))
    stages = cfg["run.stages"]
    seed = cfg["run.seed"]
    env = _section(cfg, "env")
    env_name = env.pop("name", None)
    artifacts: dict = {"config": out / "config.resolved"}

    checkpoints: dict[str, Path] = {}
    if "train" in stages:
        tcfg = _section(cfg, "train")
        variants = tcfg.pop("variants")
        (out / "checkpoints").mkdir(exist_ok=True)
        (out / "logs").mkdir(exist_ok=True)
        for v in variants:
            variant = AlgorithmVariant.parse(v)
            log.info("training %s on %s", variant.value, env_name)
            result = train(variant, env_name, TrainConfig(seed=seed, **tcfg), env_kwargs=env)
            checkpoints[variant.value] = result.checkpoint.save(out / "checkpoints" / f"{variant.value}.ckpt")
            write_log(out / "logs" / f"{variant.value}_train.csv", result.log)
    for p in cfg.get("evaluate.checkpoints", []):
        ck = PolicyCheckpoint.load(p)
        checkpoints.setdefault(ck.metadata.get("variant", Path(p).stem), Path(p))
    artifacts["checkpoints"] = checkpoints

    ecfg = _section(cfg, "evaluate")
    ecfg.pop("checkpoints", None)
    eval_config = EvalConfig(seed=seed, **ecfg)
    records = []
    if "evaluate" in stages:
        (out / "records").mkdir(exist_ok=True)
        for name, path in checkpoints.items():
            rec = evaluate(PolicyCheckpoint.load(path), env_name, eval_config, RngStream(seed), env_kwargs=env or None)
            write_records(out / "records" / f"{name}.csv", [rec])
            records.append(rec)
        write_records(out / "records.csv", records)
        artifacts["records"] = out / "records.csv"
    elif "report.records" in cfg:
        records = read_records(*cfg["report.records"])

    objective_names = None
    if checkpoints:
        objective_names = PolicyCheckpoint.load(next(iter(checkpoints.values()))).metadata.get("objective_names")
    if "report" in stages:
        rows = build_report(records, eval_config)
        write_report_csv(out / "report.csv", rows)
        (out / "report.md").write_text(format_markdown(rows, objective_names))
        artifacts["report"] = out / "report.csv"
    if "scatter" in stages:
        (out / "scatter").mkdir(exist_ok=True)
        base_names = set(cfg["scatter.baselines"]) or {r.algorithm for r in records if not r.conditioned}
        baselines = [r for r in records if r.algorithm in base_names]
        for rec in records:
            svg = out / "scatter" / f"{rec.algorithm}.svg" if cfg["scatter.svg"] else None
            others = [b for b in baselines if b.algorithm != rec.algorithm]
            export_scatter(rec, out / "scatter" / f"{rec.algorithm}.csv", svg, others, objective_names)
        artifacts["scatter"] = out / "scatter"
    if "demo" in stages:
        ck_path = cfg.get("demo.checkpoint") or checkpoints.get("moppo")
        if ck_path is None:
            raise ConfigError("demo needs a conditioned checkpoint (train 'moppo' or set demo.checkpoint)")
        demo_log = dynamic_demo(
            PolicyCheckpoint.load(ck_path),
            parse_schedule(cfg["demo.schedule"]),
            cfg["demo.horizon"],
            env_name,
            env_kwargs=env or None,
            rng=RngStream(seed),
            deterministic=cfg["demo.deterministic"],
            initial_weight=cfg.get("demo.initial_weight"),
        )
        write_demo_csv(out / "demo.csv", demo_log)
        summary = [
            {"start": s.start, "stop": s.stop, "weight": s.weight.tolist(), "mean_reward": s.mean_reward.tolist()}
            for s in demo_log.segments
        ]
        (out / "demo_segments.json").write_text(json.dumps(summary, indent=2))
        artifacts["demo"] = out / "demo.csv"
    return artifacts

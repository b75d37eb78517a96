"""Command-line entry point: ``morl-control {train,evaluate,report,scatter,demo,run}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..core import RngStream
from ..moppo import AlgorithmVariant, TrainConfig, train, write_log
from ..nn import PolicyCheckpoint
from .config import ConfigError, _bool, load_config, parse_config_text, resolve, run_config
from .demo import dynamic_demo, parse_schedule, write_demo_csv
from .evaluation import EvalConfig, evaluate, read_records, write_records
from .plots import export_scatter
from .report import build_report, format_markdown, write_report_csv


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="flat section.key = value config file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--env", choices=["bandit", "snake", "tetris"])
    p.add_argument("--variant", choices=[v.value for v in AlgorithmVariant])
    p.add_argument("--weights", type=int, help="target number of lattice weight points")
    p.add_argument("--deterministic-eval", type=_bool, metavar="BOOL", help="argmax actions during evaluation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morl-control", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one algorithm variant")
    _common(p)
    p.add_argument("--steps", type=int, help="total environment steps")

    p = sub.add_parser("evaluate", help="evaluate checkpoints on the weight lattice")
    _common(p)
    p.add_argument("checkpoints", nargs="+", type=Path)
    p.add_argument("--episodes", type=int, default=1, help="episodes per weight point")

    for name, help_text in (("report", "score solution-set CSV files"), ("metrics", "alias of report")):
        p = sub.add_parser(name, help=help_text)
        _common(p)
        p.add_argument("records", nargs="+", type=Path)
        p.add_argument("--hv-offset", type=float, default=0.1)
        p.add_argument("--alpha", type=float, default=0.001, help="significance threshold")

    p = sub.add_parser("scatter", help="per-objective weight/return scatter")
    _common(p)
    p.add_argument("records", type=Path)
    p.add_argument("--algorithm", required=True)
    p.add_argument("--baseline", action="append", default=[])
    p.add_argument("--svg", action="store_true")

    p = sub.add_parser("demo", help="switch the conditioning weight mid-episode")
    _common(p)
    p.add_argument("checkpoint", type=Path)
    p.add_argument("--schedule", required=True, help='e.g. "0:0.5,0.5,0; 500:0,0,1"')
    p.add_argument("--horizon", type=int, default=1000)

    p = sub.add_parser("run", help="execute a config-driven pipeline")
    _common(p)
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["run.seed"] = args.seed
    if args.out is not None:
        out["run.out"] = str(args.out)
    if args.env is not None:
        out["env.name"] = args.env
    if args.variant is not None:
        out["train.variants"] = [args.variant]
    if args.weights is not None:
        out["evaluate.weight_point_target"] = args.weights
    if args.deterministic_eval is not None:
        out["evaluate.deterministic"] = args.deterministic_eval
    return out


def _config_dict(args) -> dict:
    cfg = parse_config_text(args.config.read_text(), str(args.config)) if args.config else {}
    cfg.update(_overrides(args))
    return cfg


def _section(cfg, name):
    p = name + "."
    return {k[len(p):]: v for k, v in cfg.items() if k.startswith(p)}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _dispatch(args)
    except (ConfigError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "run":
        if args.config is None:
            raise ConfigError("run needs --config")
        cfg = load_config(args.config)
        cfg.update(_overrides(args))
        artifacts = run_config(resolve(cfg))
        for k, v in artifacts.items():
            print(f"{k}: {v}")
        return 0

    cfg = _config_dict(args)
    seed = cfg.get("run.seed", 0)
    out = Path(cfg.get("run.out", "."))
    out.mkdir(parents=True, exist_ok=True)
    env_kwargs = {k: v for k, v in _section(cfg, "env").items() if k != "name"}
    ecfg = {k: v for k, v in _section(cfg, "evaluate").items() if k != "checkpoints"}

    if args.command == "train":
        env = cfg.get("env.name") or "bandit"
        tcfg = _section(cfg, "train")
        variant = (tcfg.pop("variants", None) or ["moppo"])[0]
        if args.steps is not None:
            tcfg["total_steps"] = args.steps
        result = train(variant, env, TrainConfig(seed=seed, **tcfg), env_kwargs=env_kwargs)
        name = AlgorithmVariant.parse(variant).value
        path = result.checkpoint.save(out / f"{name}.ckpt")
        write_log(out / f"{name}_train.csv", result.log)
        print(path)
    elif args.command == "evaluate":
        ecfg["episodes_per_point"] = args.episodes
        config = EvalConfig(seed=seed, **ecfg)
        records = [
            evaluate(PolicyCheckpoint.load(p), cfg.get("env.name"), config, RngStream(seed), env_kwargs or None)
            for p in args.checkpoints
        ]
        write_records(out / "records.csv", records)
        print(out / "records.csv")
    elif args.command in ("report", "metrics"):
        config = EvalConfig(seed=seed, hv_offset=args.hv_offset, significance_threshold=args.alpha)
        rows = build_report(read_records(*args.records), config)
        write_report_csv(out / "report.csv", rows)
        table = format_markdown(rows)
        (out / "report.md").write_text(table)
        print(table, end="")
    elif args.command == "scatter":
        records = {r.algorithm: r for r in read_records(args.records)}
        if args.algorithm not in records:
            raise ValueError(f"algorithm {args.algorithm!r} not in {sorted(records)}")
        baselines = [records[b] for b in args.baseline]
        svg = out / f"{args.algorithm}.svg" if args.svg else None
        export_scatter(records[args.algorithm], out / f"{args.algorithm}_scatter.csv", svg, baselines)
        print(out / f"{args.algorithm}_scatter.csv")
    elif args.command == "demo":
        log = dynamic_demo(
            PolicyCheckpoint.load(args.checkpoint),
            parse_schedule(args.schedule),
            args.horizon,
            cfg.get("env.name"),
            env_kwargs=env_kwargs or None,
            rng=RngStream(seed),
            deterministic=bool(args.deterministic_eval),
        )
        write_demo_csv(out / "demo.csv", log)
        for s in log.segments:
            print(f"steps {s.start}-{s.stop} weight={s.weight.round(3).tolist()} mean reward={s.mean_reward.round(4).tolist()}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

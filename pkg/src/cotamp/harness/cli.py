"""Command-line entry point.

Subcommands: sweep (replanning-frequency dilemma), train (PPO task
planner), compare (strategy comparison), eval (checkpoint metrics), demo
(one verbose episode). Every run takes an optional YAML config plus a few
common overrides and writes CSV/SVG/JSONL outputs under --out.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import run_compare, run_demo, run_eval, run_sweep, run_train


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="YAML config file")
    p.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cotamp",
        description="Desk-scale human-robot cooperation planner experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="replanning-frequency tradeoff experiment")
    _add_common(p)

    p = sub.add_parser("train", help="train the PPO task planner")
    _add_common(p)
    p.add_argument("--episodes", type=int, default=None, help="override ppo.total_episodes")

    p = sub.add_parser("compare", help="compare picking strategies")
    _add_common(p)
    p.add_argument("--checkpoint", type=Path, default=None,
                   help="trained policy checkpoint (needed for the rl strategy)")

    p = sub.add_parser("eval", help="evaluate a trained checkpoint")
    _add_common(p)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--scenario", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--episodes", type=int, default=20)

    p = sub.add_parser("demo", help="run one verbose episode")
    _add_common(p)
    p.add_argument("--scenario", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--strategy", choices=("rl", "random", "logical", "sequential"),
                   default="random")
    p.add_argument("--checkpoint", type=Path, default=None)
    return parser


def _prepare(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.command == "train":
            cfg = dataclasses.replace(
                cfg, train=dataclasses.replace(cfg.train, seeds=(args.seed,))
            )
    out = args.out if args.out is not None else Path(cfg.out_dir) / args.command
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, out = _prepare(args)
        if args.command == "sweep":
            stats = run_sweep(cfg, out)
            print(f"sweep written to {out}")
            print(f"  spearman(frequency, path length) = "
                  f"{stats['spearman_frequency_vs_mean_path_length']:+.3f}")
            print(f"  spearman(frequency, failure ratio) = "
                  f"{stats['spearman_frequency_vs_failure_ratio']:+.3f}")
        elif args.command == "train":
            if args.episodes is not None:
                cfg = dataclasses.replace(
                    cfg, ppo=dataclasses.replace(cfg.ppo, total_episodes=args.episodes)
                )
            results = run_train(cfg, out)
            for seed, res in results.items():
                fails = [r.failures for r in res.records]
                tail = fails[-50:] if len(fails) >= 50 else fails
                mean_tail = sum(tail) / max(1, len(tail))
                print(f"seed {seed}: {res.episodes_done} episodes, "
                      f"final-window mean failures {mean_tail:.2f}")
            print(f"curves and checkpoints written to {out}")
        elif args.command == "compare":
            if "rl" in cfg.compare.strategies and args.checkpoint is None:
                raise ConfigError("compare includes the rl strategy: pass --checkpoint "
                                  "(or remove rl from compare.strategies)")
            run_compare(cfg, out, checkpoint=args.checkpoint)
            print(f"comparison written to {out}")
        elif args.command == "eval":
            stats = run_eval(cfg, args.checkpoint, args.scenario, args.episodes, out_dir=out)
            print(f"evaluated {stats['episodes']} episodes "
                  f"({args.scenario}, checkpoint trained {stats['trained_episodes']} episodes)")
            print(f"  failures {stats['failures_mean']:.2f} +/- {stats['failures_std']:.2f}")
            print(f"  replans  {stats['replans_mean']:.2f} +/- {stats['replans_std']:.2f}")
        elif args.command == "demo":
            if args.strategy == "rl" and args.checkpoint is None:
                raise ConfigError("demo with the rl strategy needs --checkpoint")
            run_demo(cfg, out, scenario=args.scenario, strategy_kind=args.strategy,
                     checkpoint=args.checkpoint)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line entry points: train, eval, sweep, radar.

Configs are JSON documents (one object per run; sweeps take an array).
GQN_LOG_LEVEL controls logging verbosity (default INFO).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .harness import RunConfig, evaluate, radar_report, sweep, train


def _load_configs(path: str) -> list[RunConfig]:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):
        doc = [doc]
    return [RunConfig.from_dict(d) for d in doc]


def _cmd_train(args) -> int:
    configs = _load_configs(args.config)
    if len(configs) != 1:
        raise SystemExit("train expects a single-config file; use sweep for arrays")
    record = train(configs[0], args.seed, args.out)
    print(json.dumps({
        "rows": len(record.rows),
        "final_eval_mean_return": record.rows[-1].eval_mean_return if record.rows else None,
        "growth_events": len(record.events),
        "checkpoint": record.checkpoint_path,
        "wall_time_s": round(record.wall_time, 3),
    }, indent=2))
    return 0


def _cmd_eval(args) -> int:
    result = evaluate(args.checkpoint, args.episodes, base_seed=args.seed)
    print(json.dumps({"mean": result["mean"], "std": result["std"],
                      "returns": result["returns"]}, indent=2))
    return 0


def _cmd_sweep(args) -> int:
    configs = _load_configs(args.configs)
    aggregate = sweep(configs, args.workers, args.out)
    print(json.dumps({name: {k: v for k, v in entry.items()
                             if k in ("final_mean_return", "final_mean_R", "errors")}
                      for name, entry in aggregate.items()}, indent=2))
    return 0


def _cmd_radar(args) -> int:
    run_dirs = sorted(p for p in Path(args.runs).iterdir() if (p / "checkpoint.bin").exists())
    if not run_dirs:
        raise SystemExit(f"no run directories with checkpoints under {args.runs}")
    report = radar_report(run_dirs, args.baseline, out_file=args.out,
                          episodes=args.episodes)
    print(json.dumps({name: entry["ratios"] for name, entry in report["runs"].items()},
                     indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gqn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one seeded training cell")
    p_train.add_argument("--config", required=True, help="JSON run config")
    p_train.add_argument("--seed", type=int, required=True)
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="greedy evaluation of a checkpoint")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, required=True)
    p_eval.add_argument("--seed", type=int, default=0, help="base seed for eval episodes")
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="run a config x seed grid and aggregate")
    p_sweep.add_argument("--configs", required=True, help="JSON array of run configs")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_radar = sub.add_parser("radar", help="smoothness ratios vs a baseline run")
    p_radar.add_argument("--runs", required=True, help="directory of run directories")
    p_radar.add_argument("--baseline", required=True, help="baseline run directory")
    p_radar.add_argument("--out", required=True, help="output JSON file")
    p_radar.add_argument("--episodes", type=int, default=10)
    p_radar.set_defaults(func=_cmd_radar)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("GQN_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``effaction {train,eval,bench,plot,check}``.

Exit codes: 0 success, 1 failed self-check, 2 config or usage error, 3 divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..agents import AGENTS, DeepConfig
from .config import (AGENT_DEFAULTS, RUN_KEYS, SCHEDULE_KEYS, ConfigError, RunConfig, format_value, from_sections,
                     load_config)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3


def defaults_epilog() -> str:
    d = DeepConfig()
    lines = [
        "agent defaults (override in [agent] or with --set agent.KEY=VALUE):",
        f"  learning rate      dqn {AGENT_DEFAULTS['dqn']['learning_rate']:g}, eff-dqn "
        f"{AGENT_DEFAULTS['eff-dqn']['learning_rate']:g}, adrqn {AGENT_DEFAULTS['adrqn']['learning_rate']:g}",
        f"  tabular alpha      q {AGENT_DEFAULTS['q']['alpha']:g}, eff-q {AGENT_DEFAULTS['eff-q']['alpha']:g}",
        f"  effective lambda   {d.lam:g} (eff-q bins {AGENT_DEFAULTS['eff-q']['eff_bins']}, "
        f"clip {AGENT_DEFAULTS['eff-q']['clip_max']:g})",
        f"  batch size         {d.batch_size}",
        f"  replay buffer      {d.buffer_size}",
        f"  explore            {d.explore} uniform-random env steps before learning",
        "  target update      1 (hard copy at the end of every episode)",
        f"  history length     {d.history} (adrqn)",
        f"  embeddings         state {d.state_embed}, action {d.action_embed}; hidden {d.hidden}",
        f"  gamma              {RunConfig.gamma}",
        f"  epsilon            {RunConfig.eps_end} + ({RunConfig.eps_start} - {RunConfig.eps_end}) "
        f"* exp(-episode / {RunConfig.tau:g})",
        "  seeds              1-5 for training, 100,110,...,190 for evaluation",
        f"  checkpoints        every {RunConfig.checkpoint_every} episodes plus final",
    ]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effaction", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter, epilog=defaults_epilog())
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one agent on one env", epilog=defaults_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    t.add_argument("--config", type=Path, help="run config file (INI sections run/schedule/agent/env)")
    t.add_argument("--env", choices=["glucose", "moveblock"], help=f"environment (default {RunConfig.env})")
    t.add_argument("--agent", choices=list(AGENTS), help=f"agent (default {RunConfig.agent})")
    t.add_argument("--episodes", type=int, help=f"training episodes (default {RunConfig.episodes})")
    t.add_argument("--seed", type=int, help=f"master seed (default {RunConfig.seed})")
    t.add_argument("--out", help=f"output root; the run goes to OUT/ENV-AGENT-seedN (default {RunConfig.out})")
    t.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value, e.g. agent.hidden=32 or schedule.tau=750")

    e = sub.add_parser("eval", help="greedy rollouts from a checkpoint")
    e.add_argument("--checkpoint", type=Path, help="checkpoint path without suffix (omit for --agent fixed)")
    e.add_argument("--agent", choices=list(AGENTS), help="expected agent; mismatch with the checkpoint is an error")
    e.add_argument("--seeds", default="100,110,120,130,140,150,160,170,180,190",
                   help="comma-separated eval seeds (default 100,110,...,190)")
    e.add_argument("--seed", type=int, help="evaluate a single seed")
    e.add_argument("--out", default="eval", help="output directory (default eval)")

    b = sub.add_parser("bench", help="runtime and memory against history length")
    b.add_argument("--lengths", default="4,8,15,30", help="comma-separated history lengths (default 4,8,15,30)")
    b.add_argument("--episodes", type=int, default=10, help="episodes per configuration (default 10)")
    b.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    b.add_argument("--repeats", type=int, default=3, help="timing repeats, fastest kept (default 3)")
    b.add_argument("--out", default="bench", help="output directory (default bench)")

    pl = sub.add_parser("plot", help="SVG charts from run artifacts")
    pl.add_argument("kind", choices=["learning-curve", "zones", "trajectory", "bench"])
    pl.add_argument("inputs", nargs="+", type=Path,
                    help="run directories (learning-curve, zones), trajectory CSVs, or a bench CSV")
    pl.add_argument("--out", type=Path, required=True, help="output SVG path")
    pl.add_argument("--window", type=int, default=1000, help="smoothing window in episodes (default 1000)")

    sub.add_parser("check", help="gradient and invariant self-tests")
    return p


def _config_from_args(args) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    run = {k: format_value(getattr(base, k)) for k in (*RUN_KEYS, *SCHEDULE_KEYS)}
    agent = {k: format_value(v) for k, v in base.agent_params.items()}
    env = {k: format_value(v) for k, v in base.env_params.items()}
    for k in ("env", "agent", "episodes", "seed", "out"):
        v = getattr(args, k)
        if v is not None:
            run[k] = str(v)
    if args.agent is not None and args.agent != base.agent:
        agent = {}
    for item in args.set:
        key, eq, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not eq or not dot:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        if section in ("run", "schedule"):
            run[name] = value
        elif section == "agent":
            agent[name] = value
        elif section == "env":
            env[name] = value
        else:
            raise ConfigError(f"--set: unknown section {section!r}")
    return from_sections(run, agent, env)


def cmd_train(args) -> int:
    from .training import train

    cfg = _config_from_args(args)
    res = train(cfg)
    if res.diverged:
        print(f"{res.run_dir}: {res.diverged}", file=sys.stderr)
        return EXIT_DIVERGED
    last = res.metrics[-1].return_discounted if res.metrics else float("nan")
    print(f"{res.run_dir}: {len(res.metrics)} episodes, last discounted return {last:.3f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .evaluate import ArchitectureMismatch, evaluate

    seeds = [args.seed] if args.seed is not None else [int(s) for s in args.seeds.split(",") if s.strip()]
    try:
        res = evaluate(args.checkpoint, seeds, agent=args.agent, out_dir=args.out)
    except ArchitectureMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("seed,start,end,length,return_discounted,termination")
    for row in res.summary:
        print(",".join(str(v) for v in row))
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import BenchConfig, bench, write_bench

    lengths = [int(s) for s in args.lengths.split(",") if s.strip()]
    try:
        rows = bench(lengths, BenchConfig(episodes=args.episodes, seed=args.seed, repeats=args.repeats))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) / "bench.csv"
    write_bench(rows, out)
    for r in rows:
        print(",".join(str(v) for v in r.as_row()))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from . import plot

    try:
        if args.kind == "learning-curve":
            path = plot.plot_learning_curve(args.inputs, args.out, window=args.window)
        elif args.kind == "zones":
            path = plot.plot_zones(args.inputs, args.out, window=args.window)
        elif args.kind == "trajectory":
            path = plot.plot_trajectory(args.inputs, args.out)
        else:
            path = plot.plot_bench(args.inputs[0], args.out)
    except plot.PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {path}")
    return EXIT_OK


def cmd_check(args) -> int:
    from .selfcheck import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK_FAILED


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "bench": cmd_bench, "plot": cmd_plot, "check": cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

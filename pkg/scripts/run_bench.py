"""Runtime and memory against ADRQN history length, with Effective-DQN as reference.

Run on an otherwise idle machine; timings are wall-clock.

    python3 scripts/run_bench.py --lengths 4,8,15,30 --episodes 20 --out runs/bench
"""

import argparse
from pathlib import Path

from effaction.harness.bench import BenchConfig, bench, write_bench
from effaction.harness.plot import plot_bench


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--lengths", default="4,8,15,30")
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default="runs/bench")
    args = p.parse_args()

    rows = bench([int(x) for x in args.lengths.split(",")],
                 BenchConfig(episodes=args.episodes, repeats=args.repeats, seed=args.seed))
    out = Path(args.out)
    write_bench(rows, out / "bench.csv")
    plot_bench(out / "bench.csv", out / "bench.svg")
    print(f"{'agent':8s} {'L':>3s} {'s/episode':>10s} {'params':>7s} {'memory MB':>10s}")
    for r in rows:
        print(f"{r.agent:8s} {r.history:3d} {r.s_per_episode:10.4f} {r.param_count:7d} {r.memory_bytes / 1e6:10.2f}")
    print(f"artifacts in {out}")


if __name__ == "__main__":
    main()

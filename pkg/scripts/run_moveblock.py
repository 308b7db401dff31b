"""Tabular Q vs Effective Q on MoveBlock: train every seed, then plot the learning curves.

    python3 scripts/run_moveblock.py --seeds 1-10 --episodes 20000 --out runs/moveblock --jobs 2
"""

import argparse
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from effaction.harness import train
from effaction.harness.plot import plot_learning_curve
from effaction.harness.profiles import MOVEBLOCK_EPISODES, moveblock


def parse_seeds(text):
    if "-" in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def one(job):
    agent, seed, episodes, out = job
    res = train(moveblock(agent, seed, episodes=episodes, out=out))
    tail = res.metrics[-1000:]
    return agent, seed, float(np.mean([m.return_discounted for m in tail])), str(res.run_dir)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", default="1-10")
    p.add_argument("--episodes", type=int, default=MOVEBLOCK_EPISODES)
    p.add_argument("--out", default="runs/moveblock")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--window", type=int, default=1000)
    args = p.parse_args()

    jobs = [(a, s, args.episodes, args.out) for s in parse_seeds(args.seeds) for a in ("q", "eff-q")]
    with ProcessPoolExecutor(args.jobs) as pool:
        results = list(pool.map(one, jobs))
    by_seed = {}
    for agent, seed, final, _ in results:
        by_seed.setdefault(seed, {})[agent] = final
    print("seed,q,eff_q,gap")
    for seed, r in sorted(by_seed.items()):
        print(f"{seed},{r['q']:.2f},{r['eff-q']:.2f},{r['eff-q'] - r['q']:+.2f}")
    gaps = [r["eff-q"] - r["q"] for r in by_seed.values()]
    print(f"eff-q ahead in {sum(g > 0 for g in gaps)}/{len(gaps)} seeds, mean gap {np.mean(gaps):+.2f}")
    svg = plot_learning_curve([d for *_, d in results], f"{args.out}/learning_curve.svg", window=args.window)
    print(f"wrote {svg}")


if __name__ == "__main__":
    main()

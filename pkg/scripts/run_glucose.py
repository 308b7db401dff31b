"""Desk-scale glucose comparison: fixed dose, DQN, Effective-DQN and ADRQN.

Trains every agent on every seed, plots learning curves and zone breakdowns,
then evaluates each seed-1 final checkpoint greedily on the default eval seeds
and plots the trajectories.

    python3 scripts/run_glucose.py --seeds 1-3 --episodes 3000 --out runs/glucose --jobs 2
"""

import argparse
import csv
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from effaction.harness import evaluate, train
from effaction.harness.plot import plot_learning_curve, plot_trajectory, plot_zones
from effaction.harness.profiles import GLUCOSE_DESK_EPISODES, glucose_desk

AGENTS = ("fixed", "dqn", "eff-dqn", "adrqn")


def one(job):
    agent, seed, episodes, out = job
    res = train(glucose_desk(agent, seed, episodes=episodes, out=out))
    if res.diverged:
        return agent, seed, float("nan"), float("nan"), str(res.run_dir)
    tail = res.metrics[-500:]
    return (agent, seed, float(np.mean([m.return_discounted for m in tail])),
            float(np.mean([m.steps_target for m in tail])), str(res.run_dir))


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", default="1-3")
    p.add_argument("--episodes", type=int, default=GLUCOSE_DESK_EPISODES)
    p.add_argument("--agents", default=",".join(AGENTS))
    p.add_argument("--out", default="runs/glucose")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--window", type=int, default=500)
    args = p.parse_args()

    lo, _, hi = args.seeds.partition("-")
    seeds = range(int(lo), int(hi or lo) + 1)
    agents = args.agents.split(",")
    # longest jobs first so a process pool stays busy
    jobs = [(a, s, args.episodes, args.out) for a in sorted(agents, key=lambda a: a != "adrqn") for s in seeds]
    with ProcessPoolExecutor(args.jobs) as pool:
        results = list(pool.map(one, jobs))

    out = Path(args.out)
    with open(out / "summary.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["agent", "seed", "final500_return_discounted", "final500_steps_target"])
        for agent, seed, ret, tz, _ in results:
            w.writerow([agent, seed, f"{ret:.3f}", f"{tz:.2f}"])
    for agent in agents:
        rs = [r for r in results if r[0] == agent]
        print(f"{agent:8s} return {np.mean([r[2] for r in rs]):8.2f} +- {np.std([r[2] for r in rs]):6.2f}   "
              f"target steps {np.mean([r[3] for r in rs]):6.1f}")

    dirs = [d for *_, d in results]
    plot_learning_curve(dirs, out / "learning_curve.svg", window=args.window)
    plot_zones([d for d in dirs if "fixed" not in d], out / "zones.svg", window=args.window)
    for agent in agents:
        run = Path(next(d for a, s, *_, d in results if a == agent and s == seeds[0]))
        ev = run / "eval"
        evaluate(run / "checkpoints" / "final", out_dir=ev)
        plot_trajectory(sorted(ev.glob("trajectory_seed*.csv")), out / f"trajectory_{agent}.svg")
        ends = list(csv.DictReader(open(ev / "summary.csv")))
        print(f"{agent:8s} eval terminations: " + ", ".join(r["termination"] for r in ends))
    print(f"artifacts in {out}")


if __name__ == "__main__":
    main()

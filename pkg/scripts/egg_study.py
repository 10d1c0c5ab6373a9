"""Liquid-egg study: generate the model, solve it, run the three-policy comparison.

    python3 scripts/egg_study.py --out runs/egg --solve-horizon 4 --reps 1000

The solved stages are aligned so the last solved stage acts in the final
simulated period; earlier periods reuse stage 0.
"""
import argparse
import time

from wcposg.cli import main as cli


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/egg")
    ap.add_argument("--solve-horizon", type=int, default=4)
    ap.add_argument("--sim-horizon", type=int, default=30)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    model = f"{args.out}/egg.json"
    art = f"{args.out}/artifacts"
    steps = [
        ["gen-example", "--out", model],
        ["solve", "--model", model, "--horizon", str(args.solve_horizon), "--out", art,
         "--seed", str(args.seed)],
        ["simulate", "--artifacts", art, "--reps", str(args.reps), "--seed", str(args.seed),
         "--horizon", str(args.sim_horizon)],
        ["export", "--artifacts", art, "--grid", "20"],
    ]
    for step in steps:
        t0 = time.perf_counter()
        rc = cli(step)
        print(f"[{step[0]}] {time.perf_counter() - t0:.1f}s")
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    raise SystemExit(run())

"""Infinite-horizon value iteration on random models; prints the dev and eps traces.

    python3 scripts/convergence_trace.py --models 3 --discount 0.85
"""
import argparse
import json
import time

import numpy as np

from wcposg.generators import random_model
from wcposg.solver import solve_infinite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--models", type=int, default=3)
    ap.add_argument("--first-seed", type=int, default=5000)
    ap.add_argument("--discount", type=float, default=0.85)
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--max-iter", type=int, default=100)
    ap.add_argument("--out", default=None, help="optional JSON file for the traces")
    args = ap.parse_args()

    beta = args.discount
    traces = []
    for m in range(args.models):
        rng = np.random.default_rng(args.first_seed + m)
        model = random_model(rng, 2, 2, 2, 2, 2, beta)
        t0 = time.perf_counter()
        rep = solve_infinite(model, args.tol, args.max_iter)
        d = rep.dev
        worst = max((d[n + 5] / d[n] for n in range(5, len(d) - 5) if d[n] > 0), default=0.0)
        print(f"model {m}: {rep.termination} after {len(d)} iterations "
              f"({time.perf_counter() - t0:.1f}s), max dev[n+5]/dev[n] = {worst:.3f} "
              f"(beta^4 = {beta ** 4:.3f}), limit bound {rep.limit_bound:.4g}")
        traces.append({"seed": args.first_seed + m, "dev": d, "eps": rep.eps_trace,
                       "termination": rep.termination})
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(traces, fh, indent=2)


if __name__ == "__main__":
    main()

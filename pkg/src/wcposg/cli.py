"""Command line interface: ``wcposg {solve,simulate,eval,gen-example,export}``.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 oracle
tractability guard.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import MpConfig, SolverConfig
from .egg import EggExampleConfig, default_confusion, gen_egg_example
from .io import load_model, read_artifacts, save_model, write_artifacts
from .model import ModelValidationError, StructureError, as_belief, eval_concave, \
    eval_layered, simplex_lattice
from .mp import SolverFailure
from .oracle import TractabilityError, exact_action, exact_value
from .policy import WorstCasePolicy, best_action
from .simulate import SimConfig, run_study
from .solver import solve_finite, solve_infinite

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_TRACTABILITY = 0, 2, 3, 4

log = logging.getLogger("wcposg")


def _parse_belief(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ModelValidationError(f"belief {text!r} is not a comma-separated list of numbers")
    return as_belief(vals, n)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(seed=args.seed, mp=MpConfig(backend=args.backend),
                        dev_mode=args.dev_mode, workers=args.workers)


def cmd_solve(args) -> int:
    model = load_model(args.model)
    cfg = _solver_config(args)
    if args.infinite:
        report = solve_infinite(model, tol=args.tol, max_iter=args.max_iter, config=cfg)
    else:
        report = solve_finite(model, args.horizon, cfg)
    out = write_artifacts(args.out, model, report, cfg)
    st = report.stages[0]
    print(f"wrote {len(report.stages)} stage(s) to {out}")
    print(f"stage 0: K1={[len(s) for s in st.layered.sets]} eps={list(st.epsilon)}")
    if report.horizon is None:
        print(f"{report.termination} after {len(report.dev)} iterations, "
              f"dev={report.dev[-1]:.6g}, limit bound={report.limit_bound:.6g}")
    else:
        print(f"error bound at t=0: {st.bound:.6g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model, report, _ = read_artifacts(args.artifacts)
    belief = None
    if args.belief is not None:
        belief = tuple(_parse_belief(args.belief, model.n_follower_states))
    cfg = SimConfig(replications=args.reps, horizon=args.horizon, seed=args.seed,
                    initial=args.initial, initial_leader_state=args.state,
                    initial_belief=belief)
    summary = run_study(model, WorstCasePolicy.from_report(report), cfg)
    csv_path, json_path = summary.write(args.out or Path(args.artifacts) / "simulation")
    for name, s in summary.stats.items():
        print(f"{name:28s} mean={s.mean:12.4f} std={s.std:10.4f} median={s.median:12.4f}")
    doc = summary.to_json()
    for key in ("proposed_vs_random_leader", "random_follower_vs_worst"):
        if key in doc:
            c = doc[key]
            print(f"{key}: diff={c['mean_diff']:.4f} lower {c['confidence']:.0%} "
                  f"bound={c['lower_bound']:.4f}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model, report, _ = read_artifacts(args.artifacts)
    if not 0 <= args.state < model.n_leader_states:
        raise ModelValidationError(f"leader state {args.state} outside 0..{model.n_leader_states - 1}")
    x = _parse_belief(args.belief, model.n_follower_states)
    policy = WorstCasePolicy.from_report(report)
    aL, aF, _, value = best_action(policy, args.stage, args.state, x)
    st = policy.stage(args.stage)
    out = {
        "stage": args.stage,
        "leader_state": model.label("leader_states", args.state),
        "belief": x.tolist(),
        "value": value,
        "concave_value": eval_concave(st.concave, args.state, x),
        "leader_action": model.label("leader_actions", aL),
        "follower_action": model.label("follower_actions", aF),
        "action_pair": [aL, aF],
    }
    if args.exact:
        if report.horizon is None:
            raise ModelValidationError("--exact needs a finite-horizon solve")
        out["exact_value"] = exact_value(model, args.stage, args.state, x, report.horizon)
        out["exact_action_pair"] = list(exact_action(model, args.stage, args.state, x,
                                                     report.horizon))
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_gen_example(args) -> int:
    cfg = EggExampleConfig(L=args.L, L_c=tuple(args.Lc), b=args.b, p=args.p, q=args.q, C=args.C,
                           confusion=default_confusion(args.accuracy), discount=args.discount,
                           horizon=args.horizon)
    save_model(gen_egg_example(cfg), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_export(args) -> int:
    model, report, _ = read_artifacts(args.artifacts)
    st = WorstCasePolicy.from_report(report).stage(args.stage)
    nF = model.n_follower_states
    X = simplex_lattice(nF, args.grid)
    out = Path(args.out or Path(args.artifacts) / f"surface_stage{args.stage:03d}_k{args.grid}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["leader_state"] + [f"x{i}" for i in range(nF)] + ["layered", "concave"])
        for sL in range(model.n_leader_states):
            lay = np.atleast_1d(eval_layered(st.layered, sL, X))
            con = np.atleast_1d(eval_concave(st.concave, sL, X))
            for x, a, c in zip(X, lay, con):
                w.writerow([sL] + [repr(float(v)) for v in x] + [repr(float(a)), repr(float(c))])
    print(f"wrote {len(X) * model.n_leader_states} rows to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wcposg", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a model file and write stage artifacts")
    s.add_argument("--model", required=True)
    h = s.add_mutually_exclusive_group(required=True)
    h.add_argument("--horizon", type=int)
    h.add_argument("--infinite", action="store_true")
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--backend", choices=("highs", "native"), default="highs")
    s.add_argument("--dev-mode", choices=("exact", "grid"), default="exact")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("simulate", help="run the three-policy study on solved artifacts")
    s.add_argument("--artifacts", required=True)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--horizon", type=int, default=30)
    s.add_argument("--initial", choices=("fixed", "random"), default="fixed")
    s.add_argument("--state", type=int, default=0, help="initial leader state")
    s.add_argument("--belief", default=None, help="initial belief (default: the model's)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("eval", help="value and action pair at one (state, belief)")
    s.add_argument("--artifacts", required=True)
    s.add_argument("--state", type=int, required=True)
    s.add_argument("--belief", required=True)
    s.add_argument("--stage", type=int, default=0)
    s.add_argument("--exact", action="store_true", help="also run the brute-force oracle")
    s.set_defaults(func=cmd_eval)

    d = EggExampleConfig()
    s = sub.add_parser("gen-example", help="write the liquid-egg model file")
    s.add_argument("--out", required=True)
    s.add_argument("--L", type=float, default=d.L)
    s.add_argument("--Lc", type=float, nargs=3, default=list(d.L_c))
    s.add_argument("--b", type=float, default=d.b)
    s.add_argument("--p", type=float, default=d.p)
    s.add_argument("--q", type=float, default=d.q)
    s.add_argument("--C", type=float, default=d.C)
    s.add_argument("--accuracy", type=float, default=0.8, help="observation accuracy")
    s.add_argument("--discount", type=float, default=d.discount)
    s.add_argument("--horizon", type=int, default=d.horizon)
    s.set_defaults(func=cmd_gen_example)

    s = sub.add_parser("export", help="value surfaces on a belief lattice as CSV")
    s.add_argument("--artifacts", required=True)
    s.add_argument("--grid", type=int, required=True)
    s.add_argument("--stage", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TractabilityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TRACTABILITY
    except (SolverFailure, StructureError) as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError, IndexError, KeyError, json.JSONDecodeError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

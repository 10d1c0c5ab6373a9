"""Monte Carlo evaluation of leader/follower policy pairs and the three-policy study.

Every replication owns three substreams ``default_rng([seed, rep, k])``
(``k = 0`` environment, ``1`` leader, ``2`` follower), so the three
configurations of a study see the same environment randomness and serial
or parallel runs agree.
"""
from __future__ import annotations

import csv
import json
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .model import PosgModel, as_belief
from .policy import WorstCasePolicy, best_action, leader_belief_step, minimizing_follower

ENV, LEADER, FOLLOWER = 0, 1, 2

CONFIGS = ("proposed_worst", "random_leader_min_follower", "proposed_random_follower")


class LeaderRule(Protocol):
    def __call__(self, t: int, sL: int, x: np.ndarray) -> int: ...


class FollowerRule(Protocol):
    def __call__(self, t: int, sL: int, x: np.ndarray, aL: int, sF: int) -> int: ...


@dataclass(frozen=True)
class SimConfig:
    replications: int = 1000
    horizon: int = 30
    seed: int = 0
    initial: str = "fixed"  # "fixed": (initial_leader_state, x0); "random": uniform sL, Dirichlet x0
    initial_leader_state: int = 0
    initial_belief: tuple[float, ...] | None = None  # defaults to the model's
    configs: tuple[str, ...] = CONFIGS

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        if self.initial not in ("fixed", "random"):
            raise ValueError(f"unknown initial-state rule {self.initial!r}")
        bad = set(self.configs) - set(CONFIGS)
        if bad:
            raise ValueError(f"unknown study configurations {sorted(bad)}")


def _draw(rng: np.random.Generator, p: np.ndarray) -> int:
    """Inverse-CDF draw consuming exactly one uniform."""
    c = np.cumsum(p)
    return min(int(np.searchsorted(c, rng.random() * c[-1], side="right")), p.size - 1)


def simulate_trajectory(model: PosgModel, leader: LeaderRule, follower: FollowerRule,
                        s0: tuple[int, int], x0, T: int, rng: np.random.Generator) -> float:
    """Total discounted reward ``sum_{t=0}^{T} beta^t r(s_t, a_t)`` along one sample path."""
    sL, sF = s0
    x = as_belief(x0, model.n_follower_states)
    nZ, nL, nF = model.kernel.shape[4:]
    total, disc = 0.0, 1.0
    for t in range(T + 1):
        aL = leader(t, sL, x)
        aF = follower(t, sL, x, aL, sF)
        total += disc * model.reward[sL, sF, aL, aF]
        disc *= model.discount
        if t == T:
            break
        k = _draw(rng, model.kernel[sL, sF, aL, aF].ravel())
        z, sL2, sF2 = np.unravel_index(k, (nZ, nL, nF))
        x = leader_belief_step(model, sL, x, (aL, aF), int(z), int(sL2))
        sL, sF = int(sL2), int(sF2)
    return float(total)


def expected_value(model: PosgModel, leader: LeaderRule, follower: FollowerRule, sL0: int, x0,
                   T: int, s_F_dist=None) -> float:
    """Exact expectation of :func:`simulate_trajectory` for deterministic rules.

    Enumerates the trajectory tree; ``s_F_dist`` (default ``x0``) is the law
    of the initial follower state.
    """
    x0 = as_belief(x0, model.n_follower_states)
    pF = x0 if s_F_dist is None else np.asarray(s_F_dist, dtype=float)
    beta = model.discount

    def rec(t, sL, sF, x):
        aL = leader(t, sL, x)
        aF = follower(t, sL, x, aL, sF)
        v = model.reward[sL, sF, aL, aF]
        if t == T:
            return v
        P = model.kernel[sL, sF, aL, aF]
        for z, sL2, sF2 in zip(*np.nonzero(P > 0)):
            lam = leader_belief_step(model, sL, x, (aL, aF), int(z), int(sL2))
            v += beta * P[z, sL2, sF2] * rec(t + 1, int(sL2), int(sF2), lam)
        return v

    return float(sum(pF[s] * rec(0, sL0, s, x0) for s in range(len(pF)) if pF[s] > 0))


# policy rules


def proposed_leader(policy: WorstCasePolicy) -> LeaderRule:
    return lambda t, sL, x: best_action(policy, t, sL, x)[0]


def worst_follower(policy: WorstCasePolicy) -> FollowerRule:
    """Follower action tagged on the vector attaining the max-min at the leader's state."""
    return lambda t, sL, x, aL, sF: best_action(policy, t, sL, x)[1]


def minimizing_follower_rule(policy: WorstCasePolicy) -> FollowerRule:
    return lambda t, sL, x, aL, sF: minimizing_follower(policy, t, sL, x, aL)


def random_leader(n_actions: int, rng: np.random.Generator) -> LeaderRule:
    return lambda t, sL, x: int(rng.integers(n_actions))


def random_follower(n_actions: int, rng: np.random.Generator) -> FollowerRule:
    return lambda t, sL, x, aL, sF: int(rng.integers(n_actions))


def _rules(name: str, model: PosgModel, policy: WorstCasePolicy, lrng, frng):
    if name == "proposed_worst":
        return proposed_leader(policy), worst_follower(policy)
    if name == "random_leader_min_follower":
        return random_leader(model.n_leader_actions, lrng), minimizing_follower_rule(policy)
    if name == "proposed_random_follower":
        return proposed_leader(policy), random_follower(model.n_follower_actions, frng)
    raise ValueError(name)


# study


@dataclass
class Stats:
    n: int
    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float

    @classmethod
    def of(cls, values) -> "Stats":
        v = np.asarray(values, dtype=float)
        q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
        std = float(v.std(ddof=1)) if v.size > 1 else 0.0
        return cls(int(v.size), float(v.mean()), std, float(v.min()), float(q1), float(med),
                   float(q3), float(v.max()))


@dataclass
class Comparison:
    """Paired one-sided test of ``mean(first) - mean(second) > 0``."""

    first: str
    second: str
    mean_diff: float
    std_err: float
    lower_bound: float  # one-sided lower confidence bound on the mean difference
    confidence: float

    @property
    def holds(self) -> bool:
        return self.lower_bound > 0.0


@dataclass
class SimSummary:
    config: SimConfig
    stats: dict[str, Stats]
    samples: dict[str, np.ndarray] = field(repr=False)
    initial: list[tuple[int, int]] = field(repr=False, default_factory=list)

    def compare(self, first: str, second: str, confidence: float = 0.99) -> Comparison:
        d = self.samples[first] - self.samples[second]
        se = float(d.std(ddof=1) / np.sqrt(d.size)) if d.size > 1 else 0.0
        zq = statistics.NormalDist().inv_cdf(confidence)
        m = float(d.mean())
        return Comparison(first, second, m, se, m - zq * se, confidence)

    def to_json(self) -> dict:
        out = {
            "config": asdict(self.config),
            "stats": {k: asdict(v) for k, v in self.stats.items()},
        }
        if {"proposed_worst", "random_leader_min_follower"} <= set(self.samples):
            out["proposed_vs_random_leader"] = asdict(
                self.compare("proposed_worst", "random_leader_min_follower"))
        if {"proposed_worst", "proposed_random_follower"} <= set(self.samples):
            out["random_follower_vs_worst"] = asdict(
                self.compare("proposed_random_follower", "proposed_worst"))
        return out

    def write(self, out_dir) -> tuple[Path, Path]:
        """``samples.csv`` (config, replication, seed, value) and ``summary.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "samples.csv"
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["config", "replication", "seed", "value"])
            for name in self.config.configs:
                for rep, v in enumerate(self.samples[name]):
                    w.writerow([name, rep, self.config.seed, repr(float(v))])
        json_path = out / "summary.json"
        json_path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _initial_state(model: PosgModel, cfg: SimConfig, env: np.random.Generator):
    if cfg.initial == "random":
        sL = int(env.integers(model.n_leader_states))
        x0 = env.dirichlet(np.ones(model.n_follower_states))
    else:
        sL = cfg.initial_leader_state
        x0 = np.asarray(cfg.initial_belief if cfg.initial_belief is not None
                        else model.initial_belief, dtype=float)
    sF = _draw(env, x0)
    return sL, sF, x0


def run_study(model: PosgModel, policy: WorstCasePolicy, cfg: SimConfig,
              progress: Callable[[int], None] | None = None) -> SimSummary:
    """Run every configuration of ``cfg`` with common random numbers.

    A finite-horizon policy is aligned so that its last solved stage acts in
    the final simulated period.
    """
    if not policy.stationary:
        policy = policy.aligned(cfg.horizon)
    samples = {name: np.zeros(cfg.replications) for name in cfg.configs}
    initial = []
    for rep in range(cfg.replications):
        for name in cfg.configs:
            env, lrng, frng = (np.random.default_rng([cfg.seed, rep, k])
                               for k in (ENV, LEADER, FOLLOWER))
            sL, sF, x0 = _initial_state(model, cfg, env)
            leader, follower = _rules(name, model, policy, lrng, frng)
            samples[name][rep] = simulate_trajectory(model, leader, follower, (sL, sF), x0,
                                                     cfg.horizon, env)
        initial.append((sL, sF))
        if progress is not None:
            progress(rep)
    stats = {name: Stats.of(v) for name, v in samples.items()}
    return SimSummary(cfg, stats, samples, initial)

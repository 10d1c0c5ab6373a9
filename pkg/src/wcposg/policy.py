"""Executing the worst-case policy stored in solved stage artifacts."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import GammaVector, PosgModel, layered_argmax, belief_update
from .solver import SolveReport, StageResult


@dataclass(frozen=True)
class WorstCasePolicy:
    """Stage-indexed (finite horizon) or stationary layered value functions.

    Time ``t`` uses stage ``t + offset``. With ``clamp`` the index is clipped
    to the solved stages, otherwise an out-of-range stage is an error.
    """

    stages: tuple[StageResult, ...]
    stationary: bool = False
    offset: int = 0
    clamp: bool = False

    @classmethod
    def from_report(cls, report: SolveReport) -> "WorstCasePolicy":
        return cls(tuple(report.stages), report.horizon is None)

    def aligned(self, sim_horizon: int) -> "WorstCasePolicy":
        """Policy for ``sim_horizon + 1`` periods whose last period uses the last stage."""
        return replace(self, offset=self.n_stages - (sim_horizon + 1), clamp=True)

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def stage(self, t: int) -> StageResult:
        if self.stationary:
            if t < 0:
                raise IndexError(f"stage {t} is negative")
            return self.stages[-1]
        i = t + self.offset
        if self.clamp:
            i = min(max(i, 0), self.n_stages - 1)
        elif not 0 <= i < self.n_stages:
            raise IndexError(f"stage {t} outside 0..{self.n_stages - 1 - self.offset}")
        return self.stages[i]


def best_action(policy: WorstCasePolicy, t: int, sL: int, x) -> tuple[int, int, GammaVector, float]:
    """``(aL, aF_worst, gamma, value)`` from the max-min argmax at ``(sL, x)``."""
    v = policy.stage(t).layered
    k1, k2, value = layered_argmax(v, sL, np.asarray(x, dtype=float))
    g = v.sets[sL][k1].vectors[k2]
    return g.leader_action, g.follower_action, g, value


def minimizing_follower(policy: WorstCasePolicy, t: int, sL: int, x, aL: int) -> int:
    """Follower action of the lowest vector in the purged ``G(sL, aL)`` at ``x``."""
    s = policy.stage(t).purged[sL][aL]
    vals = s.matrix @ np.asarray(x, dtype=float)
    k = int(np.flatnonzero(vals <= vals.min() + 1e-12 * max(1.0, abs(vals.min())))[0])
    return s.vectors[k].follower_action


def leader_belief_step(model: PosgModel, sL: int, x, a: tuple[int, int], z: int,
                       sL_next: int) -> np.ndarray:
    sigma, lam = belief_update(model, sL, x, a, z, sL_next)
    if lam is None:
        raise RuntimeError(
            f"observed branch (z={z}, sL'={sL_next}) has probability {sigma:.3g} under the belief")
    return lam

"""Backward recursion: PURGE, DOMINANCE and APPROXIMATION per leader state.

``solve_finite`` runs ``t = T-1, ..., 0`` from a zero terminal value;
``solve_infinite`` repeats the same stage map from the zero function until
successive layered functions are within ``tol`` of each other.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .approx import ApproxResult, approximate
from .backup import backup_and_purge
from .config import DEFAULT_CONFIG, SolverConfig
from .dominance import dominance_step
from .envelopes import max_envelope_gap, maxmin_value
from .model import (ConcaveValueFunction, GammaSet, GammaVector, LayeredValueFunction,
                    PosgModel, StructureError, simplex_lattice)

log = logging.getLogger(__name__)


@dataclass
class StageResult:
    t: int
    layered: LayeredValueFunction  # Gamma_t per leader state
    concave: ConcaveValueFunction  # Gamma~_t, witnesses and eps_t per leader state
    purged: tuple[tuple[GammaSet, ...], ...]  # G(sL, aL) after PURGE, indexed [sL][aL]
    capped: tuple[bool, ...]
    bound: float = 0.0  # upper bound on v_t - vbar_t from downstream approximation errors
    approx_rounds: tuple[int, ...] = ()

    @property
    def epsilon(self) -> tuple[float, ...]:
        return self.concave.errors

    @property
    def eps_star(self) -> float:
        return max(self.concave.errors)


@dataclass
class SolveReport:
    stages: list[StageResult]  # ordered by t ascending
    horizon: int | None  # None for the stationary (infinite-horizon) result
    discount: float
    dev: list[float] = field(default_factory=list)
    eps_trace: list[float] = field(default_factory=list)
    termination: str = "completed"
    limit_bound: float | None = None

    def stage(self, t: int) -> StageResult:
        if self.horizon is None:
            return self.stages[-1]
        if not 0 <= t < len(self.stages):
            raise IndexError(f"stage {t} outside 0..{len(self.stages) - 1}")
        return self.stages[t]


def _stage_rng(cfg: SolverConfig, t: int, sL: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, t, sL])


def _solve_leader_state(model: PosgModel, vnext: ConcaveValueFunction, sL: int, t: int,
                        cfg: SolverConfig):
    rng = _stage_rng(cfg, t, sL)
    purged = []
    for aL in range(model.n_leader_actions):
        kept, wit = backup_and_purge(model, vnext, sL, aL, cfg)
        purged.append(GammaSet(tuple(kept), aL, tuple(wit)))
    sets = dominance_step(purged, rng, cfg)
    res: ApproxResult = approximate(sets, cfg, rng)
    return tuple(purged), tuple(sets), res


def stage_map(model: PosgModel, vnext: ConcaveValueFunction, t: int,
              cfg: SolverConfig = DEFAULT_CONFIG) -> StageResult:
    """One application of the three steps at every leader state."""
    nL = model.n_leader_states
    if cfg.n_workers() > 1 and nL > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_workers()) as ex:
            out = list(ex.map(lambda s: _solve_leader_state(model, vnext, s, t, cfg), range(nL)))
    else:
        out = [_solve_leader_state(model, vnext, s, t, cfg) for s in range(nL)]
    for sL, (_, sets, _) in enumerate(out):
        if not sets:
            raise StructureError(f"empty layered set at t={t}, leader state {sL}")
    layered = LayeredValueFunction(tuple(o[1] for o in out))
    concave = ConcaveValueFunction(
        tuple(tuple(o[2].vectors) for o in out),
        tuple(tuple(o[2].witnesses) for o in out),
        tuple(o[2].epsilon for o in out))
    return StageResult(t, layered, concave, tuple(o[0] for o in out),
                       tuple(o[2].capped for o in out), 0.0,
                       tuple(len(o[2].rounds) for o in out))


def solve_finite(model: PosgModel, T: int, config: SolverConfig = DEFAULT_CONFIG) -> SolveReport:
    """Stages ``t = 0..T-1``; ``stage(t)`` holds the layered lower bound of ``v_t``."""
    if T < 1:
        raise ValueError("horizon must be at least 1")
    vnext = ConcaveValueFunction.constant_zero(model.n_leader_states, model.n_follower_states)
    stages: list[StageResult] = []
    bound = 0.0
    for t in range(T - 1, -1, -1):
        st = stage_map(model, vnext, t, config)
        # |v_t - vbar_t| <= beta (|v_{t+1} - vbar_{t+1}| + eps*_{t+1})
        if stages:
            bound = model.discount * (bound + stages[-1].eps_star)
        st.bound = bound
        stages.append(st)
        vnext = st.concave
        log.info("t=%d K1=%s eps*=%.3g", t, [len(s) for s in st.layered.sets], st.eps_star)
    stages.reverse()
    return SolveReport(stages, T, model.discount, eps_trace=[s.eps_star for s in stages])


def _set_matrices(v: LayeredValueFunction, sL: int) -> list[np.ndarray]:
    return [s.matrix for s in v.sets[sL]]


def maxmin_distance(vA: list[np.ndarray], vB: list[np.ndarray],
                    config: SolverConfig = DEFAULT_CONFIG) -> float:
    """``max_x |f_A(x) - f_B(x)|`` for two max-min envelopes given as lists of matrices."""
    if config.dev_mode == "grid":
        n = vA[0].shape[1]
        X = simplex_lattice(n, config.dev_grid)
        return float(np.max(np.abs(maxmin_value(vA, X) - maxmin_value(vB, X))))
    ab, _ = max_envelope_gap(vA, vB, config.mp, "distance MIP")
    ba, _ = max_envelope_gap(vB, vA, config.mp, "distance MIP")
    return max(ab, ba, 0.0)


def layered_distance(vA: LayeredValueFunction, vB: LayeredValueFunction,
                     config: SolverConfig = DEFAULT_CONFIG) -> float:
    return max(maxmin_distance(_set_matrices(vA, s), _set_matrices(vB, s), config)
               for s in range(vA.n_leader_states))


def zero_layered(model: PosgModel) -> LayeredValueFunction:
    zero = GammaVector(np.zeros(model.n_follower_states), -1, -1)
    return LayeredValueFunction(tuple((GammaSet((zero,), -1),)
                                      for _ in range(model.n_leader_states)))


def solve_infinite(model: PosgModel, tol: float = 1e-3, max_iter: int = 100,
                   config: SolverConfig = DEFAULT_CONFIG) -> SolveReport:
    """Iterate the stage map from zero until ``dev < tol`` or ``max_iter`` iterations."""
    if not model.discount < 1.0:
        raise ValueError("infinite horizon needs discount < 1")
    vprev = zero_layered(model)
    vnext = ConcaveValueFunction.constant_zero(model.n_leader_states, model.n_follower_states)
    dev, eps = [], []
    st = None
    termination = "max_iter"
    for n in range(1, max_iter + 1):
        st = stage_map(model, vnext, n, config)
        d = layered_distance(st.layered, vprev, config)
        dev.append(d)
        eps.append(st.eps_star)
        log.info("iteration %d dev=%.6g eps*=%.3g", n, d, st.eps_star)
        vprev, vnext = st.layered, st.concave
        if d < tol:
            termination = "converged"
            break
    beta = model.discount
    limit = max(eps) * beta / (1.0 - beta)
    st.bound = limit
    return SolveReport([st], None, beta, dev, eps, termination, limit)

"""DOMINANCE step: drop leader-action sets that never attain the max-min envelope."""
from __future__ import annotations

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .envelopes import max_envelope_gap, maxmin_value
from .model import GammaSet, StructureError
from .mp import MathProgram, Status, SolverFailure, solve_lp


def phi_nonempty(gamma: np.ndarray, W: np.ndarray, cfg: SolverConfig = DEFAULT_CONFIG) -> bool:
    """Is there a convex combination of the rows of ``W`` lying componentwise below ``gamma``?"""
    if np.any(np.all(W <= gamma + cfg.dedup_tol, axis=1)):
        return True
    k, n = W.shape
    A = np.vstack([W.T, np.ones((1, k))])
    b = np.concatenate([gamma + cfg.dedup_tol, [1.0]])
    senses = ["<="] * n + ["="]
    sol = solve_lp(MathProgram(c=np.zeros(k), A=A, senses=senses, b=b, lb=0.0, ub=np.inf),
                   cfg.mp)
    if sol.status == Status.INFEASIBLE:
        return False
    if not sol.ok:
        raise SolverFailure(sol.status, "pairwise dominance LP")
    return True


def pairwise_dominated(G_a, G_b, cfg: SolverConfig = DEFAULT_CONFIG) -> bool:
    """True iff the lower envelope of ``G_a`` lies below that of ``G_b`` everywhere.

    Checks that every vector of ``G_b`` sits above some convex combination
    of ``G_a``; stops at the first vector that does not.
    """
    Wa = _matrix(G_a)
    Wb = _matrix(G_b)
    return all(phi_nonempty(g, Wa, cfg) for g in Wb)


def _matrix(G) -> np.ndarray:
    if isinstance(G, GammaSet):
        return G.matrix
    if isinstance(G, np.ndarray):
        return np.atleast_2d(G)
    return np.vstack([getattr(g, "values", g) for g in G])


def random_belief(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def build_superset(G: dict[int, GammaSet] | list[GammaSet], rng: np.random.Generator,
                   cfg: SolverConfig = DEFAULT_CONFIG) -> list[GammaSet]:
    """Keep only sets not pair-wise dominated by another kept set.

    ``G`` maps leader actions to their purged sets (a list is taken in
    leader-action order).
    """
    sets = list(G.values()) if isinstance(G, dict) else list(G)
    if not sets:
        raise StructureError("no leader-action sets to compare")
    n = sets[0].matrix.shape[1]
    x0 = random_belief(rng, n)
    first = int(np.argmax([s.value(x0) for s in sets]))
    kept = [sets[first]]
    for idx, cand in enumerate(sets):
        if idx == first:
            continue
        x1 = random_belief(rng, n)
        vk = [s.value(x1) for s in kept]
        vc = cand.value(x1)
        dominated = False
        for k, s in enumerate(kept):
            if vk[k] >= vc and pairwise_dominated(cand, s, cfg):
                dominated = True
                break
        if dominated:
            continue
        evict = {k for k, s in enumerate(kept) if vk[k] < vc and pairwise_dominated(s, cand, cfg)}
        kept = [s for k, s in enumerate(kept) if k not in evict]
        kept.append(cand)
    return kept


def dominance_mip(k1: int, all_sets: list[GammaSet], cfg: SolverConfig = DEFAULT_CONFIG):
    """``u = min_x [max-min of all_sets - min of all_sets[k1]]`` and its minimiser."""
    if not 0 <= k1 < len(all_sets):
        raise StructureError("candidate set is not part of the collection")
    if len(all_sets) == 1:
        n = all_sets[0].matrix.shape[1]
        return 0.0, np.full(n, 1.0 / n)
    gap, x = max_envelope_gap([all_sets[k1].matrix], [s.matrix for s in all_sets], cfg.mp,
                              "dominance MIP")
    return -gap, x


def _attains_somewhere(cand: GammaSet, sets: list[GammaSet], probes: np.ndarray) -> bool:
    """Does ``cand`` reach the max-min envelope at one of ``probes``? Then ``u <= 0``."""
    mine = cand.value(probes)
    best = maxmin_value([s.matrix for s in sets], probes)
    return bool(np.any(mine >= best))


def _probes(cand: GammaSet) -> np.ndarray:
    n = cand.matrix.shape[1]
    pts = [np.eye(n)]
    if cand.witnesses:
        pts.append(np.vstack(cand.witnesses))
    return np.vstack(pts)


def prune_sets(superset: list[GammaSet], cfg: SolverConfig = DEFAULT_CONFIG,
               shortcut: bool = True) -> list[GammaSet]:
    """Scan sets in order, removing each whose MIP gap ``u`` exceeds the tolerance.

    With ``shortcut``, a set that attains the envelope at a vertex or one of
    its witnesses is kept without solving the MIP (that point shows ``u <= 0``).
    """
    current = list(superset)
    for cand in list(superset):
        k1 = next(i for i, s in enumerate(current) if s is cand)
        if shortcut and len(current) > 1 and _attains_somewhere(cand, current, _probes(cand)):
            continue
        u, _ = dominance_mip(k1, current, cfg)
        if u > cfg.dominance_tol:
            current.pop(k1)
    if not current:
        raise StructureError("dominance removed every set")
    return current


def dominance_step(G: dict[int, GammaSet] | list[GammaSet], rng: np.random.Generator,
                   cfg: SolverConfig = DEFAULT_CONFIG) -> list[GammaSet]:
    return prune_sets(build_superset(G, rng, cfg), cfg)

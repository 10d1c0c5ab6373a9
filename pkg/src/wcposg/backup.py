"""PURGE step: cross-sum backups of a concave successor value and witness-LP pruning."""
from __future__ import annotations

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .model import (ConcaveValueFunction, GammaVector, PosgModel, StructureError,
                    simplex_lattice, snap_to_simplex)
from .mp import MathProgram, SolverFailure, solve_lp


def dedup(vectors: list[GammaVector], tol: float = 1e-10) -> list[GammaVector]:
    """Drop componentwise duplicates, keeping the lowest ``(a^F, parent)`` tag."""
    if len(vectors) < 2:
        return list(vectors)
    order = sorted(range(len(vectors)), key=lambda i: vectors[i].tag())
    M = np.vstack([vectors[i].values for i in order])
    lex = np.lexsort(M.T[::-1])
    keep = []
    rep = None
    for a in lex:
        if rep is not None and np.max(np.abs(M[a] - M[rep])) <= tol:
            # same group: the earlier tag wins
            if a < keep[-1]:
                keep[-1] = a
            continue
        rep = a
        keep.append(a)
    # restore input order among survivors
    return [vectors[i] for i in sorted(order[a] for a in keep)]


def witness_margin(target: np.ndarray, others: np.ndarray, cfg: SolverConfig):
    """Solve ``max d`` s.t. ``x.(g' - target) >= d`` for all rows ``g'``, ``x`` in the simplex."""
    n = target.shape[0]
    k = others.shape[0]
    # variables: x (n), d (1)
    A = np.zeros((k + 1, n + 1))
    A[:k, :n] = -(others - target)
    A[:k, n] = 1.0
    A[k, :n] = 1.0
    senses = ["<="] * k + ["="]
    b = np.zeros(k + 1)
    b[k] = 1.0
    span = float(np.abs(others - target).max()) + 1.0
    c = np.zeros(n + 1)
    c[n] = 1.0
    lb = np.zeros(n + 1)
    ub = np.ones(n + 1)
    lb[n], ub[n] = -span, span
    sol = solve_lp(MathProgram(c=c, A=A, senses=senses, b=b, lb=lb, ub=ub, sense="max"), cfg.mp)
    if not sol.ok:
        raise SolverFailure(sol.status, "witness LP")
    return float(sol.x[n]), snap_to_simplex(sol.x[:n])


FILTER_MIN = 12  # below this many vectors every witness LP runs against all others


def _sample_points(n: int, target: int = 200) -> np.ndarray:
    k = 1
    while simplex_lattice(n, k + 1).shape[0] <= target:
        k += 1
    return simplex_lattice(n, k)


def _segment_envelope(M: np.ndarray, idx: np.ndarray, tol: float):
    """Two follower states: lines ``(1-p) g0 + p g1`` on the lower envelope over [0, 1].

    Convex hull trick. Returns the envelope rows and the beliefs at its
    breakpoints and endpoints; a row above the envelope at all of those is
    above it everywhere (the difference is convex piecewise linear).
    """
    a, slope = M[idx, 0], M[idx, 1] - M[idx, 0]
    order = np.lexsort((a, -slope))  # slope descending, lowest intercept first
    hull: list[int] = []
    starts: list[float] = []  # p where each hull line takes over
    for j in order:
        if hull and abs(slope[hull[-1]] - slope[j]) <= tol:
            continue  # parallel and not lower
        while hull:
            p = (a[j] - a[hull[-1]]) / (slope[hull[-1]] - slope[j])
            if p > starts[-1]:
                break
            hull.pop()
            starts.pop()
        starts.append(-np.inf if not hull else
                      (a[j] - a[hull[-1]]) / (slope[hull[-1]] - slope[j]))
        hull.append(j)
    ends = starts[1:] + [np.inf]
    keep = [h for h, lo, hi in zip(hull, starts, ends) if min(hi, 1.0) > max(lo, 0.0)]
    p = np.array([0.0, 1.0] + [q for q in starts if 0.0 < q < 1.0])
    return idx[keep], np.column_stack([1 - p, p])


def _filter(M: np.ndarray, alive: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Grow a set of envelope vectors and test each candidate against that set only.

    A candidate with a positive margin against the current set at ``x`` is
    not discarded; the minimiser at ``x`` joins the set and the candidate is
    tested again.
    """
    idx = np.flatnonzero(alive)
    out = np.zeros_like(alive)
    n = M.shape[1]
    if n == 2:
        K, X = _segment_envelope(M, idx, cfg.dedup_tol)
        out[K] = True
        # safety net against round-off in the hull
        env = (X @ M[K].T).min(axis=1)
        out[idx[np.any(X @ M[idx].T < env[:, None] - cfg.purge_margin, axis=0)]] = True
        return out
    X = _sample_points(n)
    out[idx[np.argmin(X @ M[idx].T, axis=1)]] = True
    for i in idx:
        while not out[i]:
            others = np.flatnonzero(out)
            if np.any(np.all(M[others] <= M[i] + cfg.dedup_tol, axis=1)):
                break
            d, x = witness_margin(M[i], M[others], cfg)
            if d <= cfg.purge_margin:
                break
            # the minimiser at x is on the envelope and not yet in the set
            out[idx[int(np.argmin(M[idx] @ x))]] = True
    return out


def purge(G: list[GammaVector], cfg: SolverConfig = DEFAULT_CONFIG):
    """Remove vectors that never attain the lower envelope.

    Returns ``(kept, witnesses)`` where ``witnesses[i]`` is a belief at which
    ``kept[i]`` is strictly below every other kept vector.
    """
    if not G:
        raise StructureError("purge needs a nonempty vector set")
    vecs = dedup(list(G), cfg.dedup_tol)
    n = vecs[0].values.shape[0]
    if len(vecs) == 1:
        return vecs, [np.full(n, 1.0 / n)]
    M = np.vstack([g.values for g in vecs])
    alive = np.ones(len(vecs), dtype=bool)
    if len(vecs) > FILTER_MIN:
        alive = _filter(M, alive, cfg)
    else:
        # pointwise domination: g is redundant if some other g' <= g everywhere
        for i in range(len(vecs)):
            others = alive.copy()
            others[i] = False
            if np.any(np.all(M[others] <= M[i] + cfg.dedup_tol, axis=1)):
                alive[i] = False
    witnesses: dict[int, np.ndarray] = {}
    for i in range(len(vecs)):
        if not alive[i]:
            continue
        others = alive.copy()
        others[i] = False
        if not others.any():
            witnesses[i] = np.full(n, 1.0 / n)
            continue
        d, x = witness_margin(M[i], M[others], cfg)
        if d > cfg.purge_margin:
            witnesses[i] = x
        else:
            alive[i] = False
    keep = np.flatnonzero(alive)
    return [vecs[i] for i in keep], [witnesses[i] for i in keep]


def _branch_projections(model: PosgModel, vnext: ConcaveValueFunction, sL: int,
                        a: tuple[int, int], cfg: SolverConfig):
    """Per reachable ``(z', sL')`` branch: matrix of projected successor vectors."""
    aL, aF = a
    K = model.kernel[sL, :, aL, aF]  # (nF, nZ, nL, nF')
    out = []
    for z in range(model.n_observations):
        for sL2 in range(model.n_leader_states):
            P = K[:, z, sL2, :]
            if P.sum() <= cfg.sigma_tol:
                continue
            Gn = vnext.matrices[sL2]
            if Gn.size == 0:
                raise StructureError(f"successor value empty at reachable leader state {sL2}")
            out.append(((z, sL2), Gn @ P.T))  # rows: sum_sF' P[sF, sF'] gamma'(sF')
    return out


def cross_sum_backup(model: PosgModel, vnext: ConcaveValueFunction, sL: int, aL: int,
                     cfg: SolverConfig = DEFAULT_CONFIG, prune: bool = True):
    """Build ``G(sL, aL)`` over all follower actions.

    With ``prune`` the partial cross-sums are purged after each branch
    (incremental pruning); the union over follower actions is returned
    unpurged so the caller decides when to purge it.
    """
    beta = model.discount
    result: list[GammaVector] = []
    for aF in range(model.n_follower_actions):
        r = model.reward[sL, :, aL, aF]
        branches = _branch_projections(model, vnext, sL, (aL, aF), cfg)
        # partial sums as (matrix, parent tuples)
        acc = np.zeros((1, model.n_follower_states))
        parents: list[tuple] = [()]
        for (z, sL2), proj in branches:
            acc = (acc[:, None, :] + proj[None, :, :]).reshape(-1, acc.shape[1])
            parents = [p + ((z, sL2, k),) for p in parents for k in range(proj.shape[0])]
            if prune and acc.shape[0] > 1:
                tmp = [GammaVector(row, aL, aF, par) for row, par in zip(acc, parents)]
                kept, _ = purge(tmp, cfg)
                acc = np.vstack([g.values for g in kept])
                parents = [g.parent_choice for g in kept]
        for row, par in zip(acc, parents):
            result.append(GammaVector(r + beta * row, aL, aF, par))
    return result


def backup_and_purge(model: PosgModel, vnext: ConcaveValueFunction, sL: int, aL: int,
                     cfg: SolverConfig = DEFAULT_CONFIG):
    """``G(sL, aL)`` after PURGE, with one witness belief per kept vector."""
    return purge(cross_sum_backup(model, vnext, sL, aL, cfg), cfg)

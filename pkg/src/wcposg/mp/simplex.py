"""Dense two-phase tableau simplex.

Variables are first mapped to non-negative standard-form columns (shifts,
reflections, free splits, fixed-variable elimination, upper-bound rows);
the tableau is then solved with Dantzig pricing, switching to Bland's rule
after a run of degenerate pivots.
"""
from __future__ import annotations

import numpy as np

from ..config import MpConfig
from .program import MathProgram, MpSolution, Status


class _Standard:
    """``x = offset + D @ y``, ``y >= 0``; rows ``M y (sense) r``."""

    def __init__(self, p: MathProgram):
        n = p.n_vars
        cols, offset = [], np.zeros(n)
        extra_rows = []
        for j in range(n):
            lo, hi = p.lb[j], p.ub[j]
            if hi < lo:
                raise _Infeasible
            if np.isfinite(lo) and np.isfinite(hi) and hi - lo <= 0.0:
                offset[j] = lo
                continue
            if np.isfinite(lo):
                offset[j] = lo
                cols.append((j, 1.0))
                if np.isfinite(hi):
                    extra_rows.append((len(cols) - 1, hi - lo))
            elif np.isfinite(hi):
                offset[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        D = np.zeros((n, len(cols)))
        for k, (j, s) in enumerate(cols):
            D[j, k] = s
        self.D, self.offset = D, offset
        M = p.A @ D
        r = p.b - p.A @ offset
        senses = list(p.senses)
        if extra_rows:
            U = np.zeros((len(extra_rows), len(cols)))
            for i, (k, u) in enumerate(extra_rows):
                U[i, k] = 1.0
            M = np.vstack([M, U])
            r = np.concatenate([r, [u for _, u in extra_rows]])
            senses += ["<="] * len(extra_rows)
        self.M, self.r, self.senses = M, r, senses
        sign = -1.0 if p.sense == "max" else 1.0
        self.cost = sign * (p.c @ D)
        self.cost0 = sign * float(p.c @ offset)
        self.sign = sign


class _Infeasible(Exception):
    pass


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T, basis, allowed, cfg: MpConfig, budget):
    """Minimise the last row of ``T`` over columns in ``allowed``.

    Returns ``(status, pivots_used)``.
    """
    m = T.shape[0] - 1
    tol = cfg.pivot_tol
    degenerate, bland, pivots = 0, False, 0
    allowed_idx = np.flatnonzero(allowed)
    while True:
        d = T[m, allowed_idx]
        neg = np.flatnonzero(d < -tol)
        if neg.size == 0:
            return Status.OPTIMAL, pivots
        if pivots >= budget:
            return Status.ITERATION_LIMIT, pivots
        j = allowed_idx[neg[0]] if bland else allowed_idx[neg[np.argmin(d[neg])]]
        colj = T[:m, j]
        pos = np.flatnonzero(colj > tol)
        if pos.size == 0:
            return Status.UNBOUNDED, pivots
        ratios = T[pos, -1] / colj[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        r = int(ties[np.argmin(basis[ties])])
        degenerate = degenerate + 1 if best <= tol else 0
        if degenerate >= cfg.bland_after:
            bland = True
        _pivot(T, r, j)
        basis[r] = j
        pivots += 1


def solve_lp_native(p: MathProgram, cfg: MpConfig) -> MpSolution:
    try:
        st = _Standard(p)
    except _Infeasible:
        return MpSolution(Status.INFEASIBLE)
    M, r = st.M.copy(), st.r.copy()
    m, n = M.shape
    # slack columns
    slack_cols = []
    for i, s in enumerate(st.senses):
        if s == "=":
            slack_cols.append(None)
            continue
        slack_cols.append(1.0 if s == "<=" else -1.0)
    n_slack = sum(s is not None for s in slack_cols)
    S = np.zeros((m, n_slack))
    k = 0
    for i, s in enumerate(slack_cols):
        if s is not None:
            S[i, k] = s
            k += 1
    body = np.hstack([M, S])
    neg = r < 0
    body[neg] *= -1
    r = np.abs(r)
    # initial basis: a +1 slack where available, otherwise an artificial
    basis = np.full(m, -1)
    k = 0
    for i, s in enumerate(slack_cols):
        if s is not None:
            if body[i, n + k] == 1.0:
                basis[i] = n + k
            k += 1
    art_rows = np.flatnonzero(basis < 0)
    n_art = art_rows.size
    width = n + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, : n + n_slack] = body
    T[:m, -1] = r
    for k, i in enumerate(art_rows):
        T[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k
    budget = cfg.max_pivots
    if n_art:
        T[m, : n + n_slack] = -T[art_rows, : n + n_slack].sum(axis=0)
        T[m, -1] = -T[art_rows, -1].sum()
        allowed = np.ones(width, dtype=bool)
        status, used = _run(T, basis, allowed, cfg, budget)
        budget -= used
        if status == Status.ITERATION_LIMIT:
            return MpSolution(status)
        scale = max(1.0, float(np.abs(r).max(initial=0.0)))
        if -T[m, -1] > cfg.feasibility_tol * scale:
            return MpSolution(Status.INFEASIBLE)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n + n_slack:
                cand = np.flatnonzero(np.abs(T[i, : n + n_slack]) > cfg.pivot_tol)
                if cand.size:
                    _pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                else:
                    keep[i] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = T[rows][:, list(range(n + n_slack)) + [width]]
        basis = basis[keep]
        m = T.shape[0] - 1
        width = n + n_slack
    cost = np.concatenate([st.cost, np.zeros(n_slack)])
    T[m, :] = 0.0
    T[m, :width] = cost
    for i in range(m):
        if cost[basis[i]] != 0.0:
            T[m] -= cost[basis[i]] * T[i]
    status, _ = _run(T, basis, np.ones(width, dtype=bool), cfg, budget)
    if status != Status.OPTIMAL:
        return MpSolution(status)
    y = np.zeros(width)
    y[basis] = T[:m, -1]
    x = st.offset + st.D @ y[:n]
    return MpSolution(Status.OPTIMAL, float(p.c @ x), x)

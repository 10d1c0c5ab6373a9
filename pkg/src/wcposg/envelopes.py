"""Big-M programs over the belief simplex comparing two max-min envelopes.

A max-min envelope is given as a list of matrices, one per set, with rows
as vectors: ``f(x) = max_k min_i x . sets[k][i]``. A single matrix is the
plain lower envelope ``min_i x . m[i]``.

``max_envelope_gap(upper, lower)`` computes ``max_x f_upper(x) - f_lower(x)``:

* ``f_upper`` is encoded with one set-selection binary per set
  (``z1 <= x.gamma + M (1 - y_k)`` for every vector of set ``k``,
  ``sum_k y_k = 1``);
* ``f_lower`` with one min-selection binary per vector of each set
  (``z2 >= x.gamma - M (1 - rho_kj)``, ``sum_j rho_kj = 1`` per set).

With two follower states the simplex is a segment and both envelopes are
piecewise linear with kinks only where two of the lines cross, so
``segment_gap`` finds the exact maximum by evaluating every crossing.

Selections that are forced (a single set, a singleton set) carry no binary.

Two families of valid cuts tighten the LP relaxation:

* each set's minimum is concave, so it lies above its chord through the
  vertex values: ``z2 >= x . colmin(lower[k])``;
* picking one vector per upper set, ``f_upper(x) <= x . (componentwise max
  of the picks)``; one cut per vertex, picking the per-set minimiser there.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .config import MpConfig
from .model import snap_to_simplex
from .mp import MathProgram, SolverFailure, solve_mip


def big_m(*arrays) -> float:
    """``2 (1 + max |x.gamma|)`` over simplex vertices, i.e. over all entries."""
    mx = max((float(np.abs(a).max()) for a in arrays if np.size(a)), default=0.0)
    return 2.0 * (1.0 + mx)


def maxmin_value(sets: Sequence[np.ndarray], x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.stack([(x @ m.T).min(axis=-1) for m in sets], axis=-1).max(axis=-1)


def build_gap_program(upper: Sequence[np.ndarray], lower: Sequence[np.ndarray]):
    """Return ``(program, layout)``; ``layout`` maps roles to column slices."""
    upper = [np.atleast_2d(np.asarray(m, dtype=float)) for m in upper]
    lower = [np.atleast_2d(np.asarray(m, dtype=float)) for m in lower]
    n = upper[0].shape[1]
    M = big_m(*upper, *lower)
    bound = M / 2.0
    n_y = len(upper) if len(upper) > 1 else 0
    rho_sets = [k for k, m in enumerate(lower) if m.shape[0] > 1]
    rho_start = {}
    col = n + 2 + n_y
    for k in rho_sets:
        rho_start[k] = col
        col += lower[k].shape[0]
    n_vars = col
    iz1, iz2 = n, n + 1
    rows, senses, rhs = [], [], []

    def row():
        r = np.zeros(n_vars)
        rows.append(r)
        return r

    r = row()
    r[:n] = 1.0
    senses.append("=")
    rhs.append(1.0)
    for k, m in enumerate(upper):
        for g in m:
            r = row()
            r[iz1] = 1.0
            r[:n] = -g
            if n_y:
                r[n + 2 + k] = M
                rhs.append(M)
            else:
                rhs.append(0.0)
            senses.append("<=")
    if n_y:
        r = row()
        r[n + 2: n + 2 + n_y] = 1.0
        senses.append("=")
        rhs.append(1.0)
    for k, m in enumerate(lower):
        for j, g in enumerate(m):
            r = row()
            r[:n] = g
            r[iz2] = -1.0
            if k in rho_start:
                r[rho_start[k] + j] = M
                rhs.append(M)
            else:
                rhs.append(0.0)
            senses.append("<=")
        if k in rho_start:
            r = row()
            r[rho_start[k]: rho_start[k] + m.shape[0]] = 1.0
            senses.append("=")
            rhs.append(1.0)
    for m in lower:
        r = row()
        r[:n] = m.min(axis=0)
        r[iz2] = -1.0
        senses.append("<=")
        rhs.append(0.0)
    for s in range(n):
        r = row()
        r[:n] = -np.max([m[np.argmin(m[:, s])] for m in upper], axis=0)
        r[iz1] = 1.0
        senses.append("<=")
        rhs.append(0.0)
    c = np.zeros(n_vars)
    c[iz1], c[iz2] = 1.0, -1.0
    lb = np.zeros(n_vars)
    ub = np.ones(n_vars)
    lb[iz1] = lb[iz2] = -bound
    ub[iz1] = ub[iz2] = bound
    binaries = list(range(n + 2, n_vars))
    prog = MathProgram(c=c, A=np.array(rows), senses=senses, b=rhs, lb=lb, ub=ub,
                       sense="max", binaries=binaries)
    layout = {"x": slice(0, n), "z1": iz1, "z2": iz2, "M": M,
              "y": slice(n + 2, n + 2 + n_y), "rho": rho_start}
    return prog, layout


def gap_incumbent(upper, lower, layout, n_vars: int, x) -> np.ndarray:
    """Feasible MIP point encoding belief ``x`` (exact values, argmax/argmin selections)."""
    upper = [np.atleast_2d(np.asarray(m, dtype=float)) for m in upper]
    lower = [np.atleast_2d(np.asarray(m, dtype=float)) for m in lower]
    v = np.zeros(n_vars)
    v[layout["x"]] = x
    up = [float((m @ x).min()) for m in upper]
    k = int(np.argmax(up))
    v[layout["z1"]] = up[k]
    v[layout["z2"]] = float(maxmin_value(lower, x))
    if layout["y"].stop > layout["y"].start:
        v[layout["y"].start + k] = 1.0
    for kk, start in layout["rho"].items():
        v[start + int(np.argmin(lower[kk] @ x))] = 1.0
    return v


def segment_gap(upper: Sequence[np.ndarray], lower: Sequence[np.ndarray]):
    """Exact ``max_x f_upper - f_lower`` on the two-state simplex."""
    G = np.vstack([np.atleast_2d(m) for m in (*upper, *lower)])
    a, s = G[:, 0], G[:, 1] - G[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (a[None, :] - a[:, None]) / (s[:, None] - s[None, :])
    p = np.unique(np.concatenate([[0.0, 1.0], p[np.isfinite(p) & (p > 0) & (p < 1)]]))
    X = np.column_stack([1 - p, p])
    gaps = maxmin_value(upper, X) - maxmin_value(lower, X)
    i = int(np.argmax(gaps))
    return float(gaps[i]), X[i]


def max_envelope_gap(upper: Sequence[np.ndarray], lower: Sequence[np.ndarray],
                     cfg: MpConfig | None = None, what: str = "envelope gap MIP", hints=None):
    """``(max_x f_upper - f_lower, argmax x)``; the value is re-evaluated at ``x``.

    The best of the simplex vertices and ``hints`` seeds the search.
    """
    if (cfg is None or cfg.segment_exact) and np.atleast_2d(upper[0]).shape[1] == 2:
        return segment_gap(upper, lower)
    prog, lay = build_gap_program(upper, lower)
    n = lay["x"].stop
    cand = np.eye(n) if hints is None else np.vstack([np.eye(n), np.atleast_2d(hints)])
    gaps = maxmin_value(upper, cand) - maxmin_value(lower, cand)
    start = gap_incumbent(upper, lower, lay, prog.n_vars, cand[int(np.argmax(gaps))])
    sol = solve_mip(prog, cfg, incumbent=start)
    if not sol.ok:
        raise SolverFailure(sol.status, what)
    x = snap_to_simplex(sol.x[lay["x"]])
    value = float(maxmin_value(upper, x) - maxmin_value(lower, x))
    return value, x

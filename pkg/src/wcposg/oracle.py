"""Exact worst-case values by recursion over the belief tree (small instances only)."""
from __future__ import annotations

import numpy as np

from .model import PosgModel, as_belief

MAX_BRANCHES = 10**7
SIGMA_TOL = 1e-12


class TractabilityError(RuntimeError):
    """Raised when the belief tree would be too large to enumerate."""


def _guard(model: PosgModel, depth: int):
    fan = (model.n_leader_actions * model.n_follower_actions * model.n_observations
           * model.n_leader_states)
    if depth > 0 and fan ** depth > MAX_BRANCHES:
        raise TractabilityError(
            f"belief tree has {fan}^{depth} branches, above the limit of {MAX_BRANCHES}")


def _q_values(model: PosgModel, depth: int, sL: int, X: np.ndarray) -> np.ndarray:
    """``Q[b, aL, aF]`` for a batch of beliefs ``X`` (B, nF) with ``depth`` steps to go."""
    B = X.shape[0]
    nAL, nAF = model.n_leader_actions, model.n_follower_actions
    Q = np.einsum("bf,fla->bla", X, model.reward[sL])
    if depth == 1 or model.discount == 0.0:
        return Q
    beta = model.discount
    for aL in range(nAL):
        for aF in range(nAF):
            K = model.kernel[sL, :, aL, aF]  # (nF, nZ, nL, nF')
            un = np.tensordot(X, K, axes=([1], [0]))  # (B, nZ, nL, nF')
            sig = un.sum(axis=-1)
            for z in range(model.n_observations):
                for sL2 in range(model.n_leader_states):
                    s = sig[:, z, sL2]
                    live = s > SIGMA_TOL
                    if not live.any():
                        continue
                    lam = un[live, z, sL2] / s[live, None]
                    Q[live, aL, aF] += beta * s[live] * _values(model, depth - 1, sL2, lam)
    return Q


def _values(model: PosgModel, depth: int, sL: int, X: np.ndarray) -> np.ndarray:
    if depth == 0:
        return np.zeros(X.shape[0])
    return _q_values(model, depth, sL, X).min(axis=2).max(axis=1)


def exact_values(model: PosgModel, t: int, sL: int, X, T: int) -> np.ndarray:
    """``v_t(sL, x)`` for each row of ``X`` with ``v_T = 0``."""
    if not 0 <= t <= T:
        raise ValueError(f"stage {t} outside 0..{T}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _guard(model, T - t)
    return _values(model, T - t, sL, X)


def exact_value(model: PosgModel, t: int, sL: int, x, T: int) -> float:
    x = as_belief(x, model.n_follower_states)
    return float(exact_values(model, t, sL, x[None], T)[0])


def exact_action(model: PosgModel, t: int, sL: int, x, T: int,
                 tie_tol: float = 1e-9) -> tuple[int, int]:
    """Optimal ``(aL, aF)`` at ``(sL, x)``; lowest index wins ties."""
    if t >= T:
        raise ValueError("no action at the terminal stage")
    x = as_belief(x, model.n_follower_states)
    _guard(model, T - t)
    Q = _q_values(model, T - t, sL, x[None])[0]
    aF_min = Q.min(axis=1)
    best = aF_min.max()
    aL = int(np.flatnonzero(aF_min >= best - tie_tol * max(1.0, abs(best)))[0])
    row = Q[aL]
    aF = int(np.flatnonzero(row <= row.min() + tie_tol * max(1.0, abs(row.min())))[0])
    return aL, aF

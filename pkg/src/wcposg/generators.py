"""Random and constructed models used by tests, scripts and the acceptance suite."""
from __future__ import annotations

import numpy as np

from .model import PosgModel


def random_model(rng: np.random.Generator, nL: int = 2, nF: int = 2, nAL: int = 2, nAF: int = 2,
                 nZ: int = 2, discount: float = 0.9, sparsity: float = 0.0,
                 reward_scale: float = 10.0) -> PosgModel:
    """Dirichlet kernel rows, uniform rewards on ``[-scale, scale]``.

    With ``sparsity > 0`` each kernel entry is zeroed with that probability
    (at least one entry per row is kept).
    """
    shape = (nL, nF, nAL, nAF)
    n_out = nZ * nL * nF
    rows = rng.dirichlet(np.ones(n_out), size=shape)
    if sparsity > 0:
        mask = rng.random(rows.shape) >= sparsity
        keep = rng.integers(n_out, size=shape)
        np.put_along_axis(mask, keep[..., None], True, axis=-1)
        rows = rows * mask
        rows /= rows.sum(axis=-1, keepdims=True)
    kernel = rows.reshape(shape + (nZ, nL, nF))
    reward = rng.uniform(-reward_scale, reward_scale, size=shape)
    x0 = rng.dirichlet(np.ones(nF))
    return PosgModel(kernel, reward, discount, x0, name="random")


def with_reward(model: PosgModel, reward) -> PosgModel:
    reward = np.broadcast_to(np.asarray(reward, dtype=float), model.reward.shape)
    return PosgModel(model.kernel, reward, model.discount, model.initial_belief,
                     model.labels, model.name, model.description)


def dominant_action_model(rng: np.random.Generator, nL: int = 2, nF: int = 3, nAL: int = 3,
                          nAF: int = 2, nZ: int = 2, discount: float = 0.9,
                          margin: float = 1.0) -> PosgModel:
    """A model where leader action 0 pairwise dominates every other action.

    Rewards of action 0 exceed the best reward of every other action by
    ``margin`` in every (state, follower action), and the kernel does not
    depend on the leader action, so the continuation is shared.
    """
    base = random_model(rng, nL, nF, 1, nAF, nZ, discount)
    kernel = np.repeat(base.kernel, nAL, axis=2)
    reward = rng.uniform(-10.0, 10.0, size=(nL, nF, nAL, nAF))
    others = reward[:, :, 1:, :].max(axis=(1, 2, 3))  # per leader state
    reward[:, :, 0, :] = np.maximum(reward[:, :, 0, :], others[:, None, None] + margin)
    return PosgModel(kernel, reward, discount, base.initial_belief, name="dominant-action")

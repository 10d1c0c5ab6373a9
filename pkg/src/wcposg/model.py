"""Game model, belief arithmetic and value-function containers.

Indices are dense and 0-based everywhere. A joint state is the pair
``(leader_state, follower_state)`` and a joint action is
``(leader_action, follower_action)``. The kernel array is laid out as::

    kernel[sL, sF, aL, aF, z', sL', sF'] = P(z', s' | s, a)

and the reward array as ``reward[sL, sF, aL, aF]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

PROB_TOL = 1e-9
SIGMA_TOL = 1e-12


class ModelValidationError(ValueError):
    """Raised when a model or belief violates its invariants."""


class StructureError(RuntimeError):
    """Raised when a value-function structure is empty or malformed."""


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_belief(x, n: int | None = None, tol: float = PROB_TOL) -> np.ndarray:
    """Validate and return ``x`` as a float belief vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ModelValidationError(f"belief must be a vector, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise ModelValidationError(f"belief has length {x.shape[0]}, expected {n}")
    if np.any(x < -tol) or not np.all(np.isfinite(x)):
        raise ModelValidationError(f"belief has negative or non-finite entries: {x}")
    if abs(x.sum() - 1.0) > tol:
        raise ModelValidationError(f"belief sums to {x.sum():.12g}, not 1")
    return x


def snap_to_simplex(x) -> np.ndarray:
    """Clip negatives and renormalise; used on points returned by solvers."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    s = x.sum()
    if s <= 0:
        return np.full(x.shape, 1.0 / x.shape[0])
    return x / s


@dataclass(frozen=True, eq=False)
class PosgModel:
    kernel: np.ndarray
    reward: np.ndarray
    discount: float
    initial_belief: np.ndarray
    labels: Mapping[str, tuple[str, ...]] | None = None
    name: str = ""
    description: str = ""

    def __post_init__(self):
        kernel = _readonly(self.kernel)
        reward = _readonly(self.reward)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "discount", float(self.discount))
        if kernel.ndim != 7:
            raise ModelValidationError(f"kernel must be 7-dimensional, got {kernel.ndim}")
        nL, nF, nAL, nAF, nZ, nL2, nF2 = kernel.shape
        if min(kernel.shape) < 1:
            raise ModelValidationError("all index sets must be nonempty")
        if (nL2, nF2) != (nL, nF):
            raise ModelValidationError(
                f"kernel successor dims {(nL2, nF2)} do not match state dims {(nL, nF)}")
        if reward.shape != (nL, nF, nAL, nAF):
            raise ModelValidationError(
                f"reward shape {reward.shape} does not match {(nL, nF, nAL, nAF)}")
        if not np.all(np.isfinite(reward)):
            raise ModelValidationError("reward values must be finite")
        if not np.all(np.isfinite(kernel)) or np.any(kernel < 0):
            bad = np.argwhere(~np.isfinite(kernel) | (kernel < 0))[0]
            raise ModelValidationError(
                f"kernel has a negative or non-finite entry at s=({bad[0]},{bad[1]}), "
                f"a=({bad[2]},{bad[3]})")
        sums = kernel.reshape(nL, nF, nAL, nAF, -1).sum(axis=-1)
        off = np.argwhere(np.abs(sums - 1.0) > PROB_TOL)
        if len(off):
            i = tuple(off[0])
            raise ModelValidationError(
                f"kernel row for s=({i[0]},{i[1]}), a=({i[2]},{i[3]}) sums to "
                f"{sums[i]:.12g}, not 1")
        if not 0.0 <= self.discount <= 1.0:
            raise ModelValidationError(f"discount {self.discount} outside [0, 1]")
        object.__setattr__(self, "initial_belief", _readonly(as_belief(self.initial_belief, nF)))

    @property
    def n_leader_states(self) -> int:
        return self.kernel.shape[0]

    @property
    def n_follower_states(self) -> int:
        return self.kernel.shape[1]

    @property
    def n_leader_actions(self) -> int:
        return self.kernel.shape[2]

    @property
    def n_follower_actions(self) -> int:
        return self.kernel.shape[3]

    @property
    def n_observations(self) -> int:
        return self.kernel.shape[4]

    def label(self, space: str, i: int) -> str:
        if self.labels and space in self.labels:
            return self.labels[space][i]
        return str(i)

    @cached_property
    def reachable(self) -> np.ndarray:
        """Boolean ``[sL, aL, aF, z', sL']``: some follower state can reach it."""
        return self.kernel.sum(axis=(1, 6)) > SIGMA_TOL


def belief_update(model: PosgModel, sL: int, x, a: tuple[int, int], z: int, sL_next: int,
                  sigma_tol: float = SIGMA_TOL):
    """Return ``(sigma, posterior)`` for one successor branch.

    ``sigma`` is the probability of observing ``z`` and landing in leader
    state ``sL_next``; the posterior is ``None`` when that branch has
    probability below ``sigma_tol``.
    """
    aL, aF = a
    block = model.kernel[sL, :, aL, aF, z, sL_next, :]
    unnorm = np.asarray(x, dtype=float) @ block
    sigma = float(unnorm.sum())
    if sigma <= sigma_tol:
        return sigma, None
    return sigma, unnorm / sigma


def successor_table(model: PosgModel, sL: int, x, a: tuple[int, int]):
    """All branches at once: ``sigma[z', sL']`` and ``unnormalised[z', sL', sF']``.

    ``x`` may carry leading batch dimensions.
    """
    aL, aF = a
    block = model.kernel[sL, :, aL, aF]  # (nF, nZ, nL, nF')
    unnorm = np.tensordot(np.asarray(x, dtype=float), block, axes=([-1], [0]))
    return unnorm.sum(axis=-1), unnorm


@dataclass(frozen=True, eq=False)
class GammaVector:
    """One linear piece over the belief simplex, tagged with its action pair.

    ``parent_choice`` lists ``(z', sL', index)`` triples naming the
    successor-stage vector chosen on each reachable branch.
    """

    values: np.ndarray
    leader_action: int
    follower_action: int
    parent_choice: tuple[tuple[int, int, int], ...] | None = None

    def __post_init__(self):
        v = _readonly(self.values)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise StructureError("gamma vector values must be a finite 1-d array")
        object.__setattr__(self, "values", v)

    @property
    def parents(self) -> dict[tuple[int, int], int]:
        return {(z, s): k for z, s, k in (self.parent_choice or ())}

    def tag(self):
        return (self.follower_action, self.parent_choice or ())


@dataclass(frozen=True, eq=False)
class GammaSet:
    """Vectors sharing one leader action; the set's value is their minimum."""

    vectors: tuple[GammaVector, ...]
    leader_action: int
    witnesses: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        if self.witnesses is not None:
            object.__setattr__(self, "witnesses", tuple(self.witnesses))
            if len(self.witnesses) != len(self.vectors):
                raise StructureError("one witness per vector")
        if not self.vectors:
            raise StructureError("a gamma set must hold at least one vector")
        for g in self.vectors:
            if g.leader_action != self.leader_action:
                raise StructureError("all vectors of a gamma set share its leader action")

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.vstack([g.values for g in self.vectors])
        m.setflags(write=False)
        return m

    def __len__(self):
        return len(self.vectors)

    def value(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) @ self.matrix.T).min(axis=-1)


@dataclass(frozen=True, eq=False)
class LayeredValueFunction:
    """``value(sL, x) = max_k1 min_k2 x . gamma[k1, k2]``, one list of sets per leader state."""

    sets: tuple[tuple[GammaSet, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(s) for s in self.sets))

    @property
    def n_leader_states(self) -> int:
        return len(self.sets)

    def K1(self, sL: int) -> int:
        return len(self.sets[sL])

    def K2(self, sL: int, k1: int) -> int:
        return len(self.sets[sL][k1])

    def all_vectors(self, sL: int) -> list[GammaVector]:
        return [g for s in self.sets[sL] for g in s.vectors]

    def value(self, sL: int, x) -> np.ndarray:
        return eval_layered(self, sL, x)


@dataclass(frozen=True, eq=False)
class ConcaveValueFunction:
    """``value(sL, x) = min x . gamma`` over one set per leader state."""

    vectors: tuple[tuple[GammaVector, ...], ...]
    witnesses: tuple[tuple[np.ndarray, ...], ...]
    errors: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(tuple(v) for v in self.vectors))
        object.__setattr__(self, "witnesses", tuple(tuple(w) for w in self.witnesses))
        object.__setattr__(self, "errors", tuple(float(e) for e in self.errors))
        if any(e < 0 for e in self.errors):
            raise StructureError("approximation errors must be non-negative")

    @cached_property
    def matrices(self) -> tuple[np.ndarray, ...]:
        out = []
        for vs in self.vectors:
            if not vs:
                out.append(np.zeros((0, 0)))
                continue
            m = np.vstack([g.values for g in vs])
            m.setflags(write=False)
            out.append(m)
        return tuple(out)

    @classmethod
    def constant_zero(cls, n_leader: int, n_follower: int) -> "ConcaveValueFunction":
        zero = GammaVector(np.zeros(n_follower), -1, -1)
        uniform = np.full(n_follower, 1.0 / n_follower)
        return cls(tuple((zero,) for _ in range(n_leader)),
                   tuple((uniform,) for _ in range(n_leader)),
                   tuple(0.0 for _ in range(n_leader)))

    def value(self, sL: int, x) -> np.ndarray:
        return eval_concave(self, sL, x)


def eval_layered(v: LayeredValueFunction, sL: int, x):
    """Max over sets of the per-set minimum; accepts a batch of beliefs."""
    sets = v.sets[sL]
    if not sets:
        raise StructureError(f"layered value function is empty at leader state {sL}")
    x = np.asarray(x, dtype=float)
    vals = np.stack([s.value(x) for s in sets], axis=-1)
    out = vals.max(axis=-1)
    return float(out) if out.ndim == 0 else out


def layered_argmax(v: LayeredValueFunction, sL: int, x, tie_tol: float = 1e-12):
    """Return ``(k1, k2, value)`` for one belief with lowest-index tie-breaking."""
    sets = v.sets[sL]
    if not sets:
        raise StructureError(f"layered value function is empty at leader state {sL}")
    x = np.asarray(x, dtype=float)
    best_k2, mins = [], []
    for s in sets:
        vals = s.matrix @ x
        k2 = _first_within(vals, vals.min(), tie_tol)
        best_k2.append(k2)
        mins.append(vals[k2])
    mins = np.array(mins)
    k1 = _first_within(-mins, -mins.max(), tie_tol)
    return k1, best_k2[k1], float(mins.max())


def _first_within(vals: np.ndarray, best: float, tol: float) -> int:
    scale = max(1.0, abs(best))
    return int(np.flatnonzero(vals <= best + tol * scale)[0])


def eval_concave(v: ConcaveValueFunction, sL: int, x):
    m = v.matrices[sL]
    if m.size == 0:
        raise StructureError(f"concave value function is empty at leader state {sL}")
    out = (np.asarray(x, dtype=float) @ m.T).min(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def simplex_lattice(n: int, k: int) -> np.ndarray:
    """All points of the simplex in ``R^n`` with coordinates in multiples of ``1/k``."""
    if n == 1:
        return np.ones((1, 1))
    pts = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            pts.append(prefix + [remaining])
            return
        for i in range(remaining, -1, -1):
            rec(prefix + [i], remaining - i, slots - 1)

    rec([], k, n)
    return np.array(pts, dtype=float) / k


def vectors_matrix(vectors: Sequence[GammaVector]) -> np.ndarray:
    return np.vstack([g.values for g in vectors])

"""Liquid-egg security example: a manager protecting three production targets.

Leader state: the protected target, or ``Attacked``. Follower state: the
adversary's location, or ``Attacked`` after a successful insertion.
Follower actions are ``attack``, ``move to next target`` and ``move to
previous target`` (targets on a cycle). A successful attack is always
detected: the follower moves to ``Attacked`` with observation ``Attacked``;
the next period pays the cleanup value ``C`` and the game is absorbed in
``(Attacked, Attacked)`` with reward 0. Otherwise the manager observes the
adversary's new location through the confusion matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelValidationError, PosgModel

N_TARGETS = 3
ATTACKED = N_TARGETS
ATTACK, MOVE_NEXT, MOVE_PREV = 0, 1, 2


def default_confusion(accuracy: float = 0.8) -> tuple[tuple[float, ...], ...]:
    off = (1.0 - accuracy) / (N_TARGETS - 1)
    rows = []
    for i in range(N_TARGETS):
        rows.append(tuple(accuracy if j == i else (off if j < N_TARGETS else 0.0)
                          for j in range(N_TARGETS + 1)))
    rows.append(tuple(1.0 if j == ATTACKED else 0.0 for j in range(N_TARGETS + 1)))
    return tuple(rows)


@dataclass(frozen=True)
class EggExampleConfig:
    """Parameters of the example.

    The defaults are a derived fixture: with them the first solved stage has
    three supporting leader-action sets of sizes 2, 2 and 1.
    """

    L: float = 900.0  # qualified packages per period
    L_c: tuple[float, float, float] = (400.0, 500.0, 2000.0)  # contaminated packages per target
    b: float = 200.0  # bonus for a prevented attack
    p: float = 0.1  # attack success probability at the protected target
    q: float = 0.6  # ... at an unprotected target
    C: float = -100.0  # reward in the cleanup period
    confusion: tuple[tuple[float, ...], ...] = field(default_factory=default_confusion)
    discount: float = 0.85
    horizon: int = 30
    initial_belief: tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3, 0.0)

    def __post_init__(self):
        if len(self.L_c) != N_TARGETS:
            raise ModelValidationError(f"L_c needs {N_TARGETS} entries")
        if not (0.0 <= self.p < self.q <= 1.0):
            raise ModelValidationError(f"need 0 <= p < q <= 1, got p={self.p}, q={self.q}")
        if self.b < 0:
            raise ModelValidationError("bonus b must be non-negative")
        conf = np.asarray(self.confusion, dtype=float)
        if conf.shape != (N_TARGETS + 1, N_TARGETS + 1):
            raise ModelValidationError(f"confusion matrix must be {N_TARGETS + 1}x{N_TARGETS + 1}")
        if np.any(conf < 0) or np.any(np.abs(conf.sum(axis=1) - 1.0) > 1e-9):
            raise ModelValidationError("confusion rows must be probability vectors")
        if not 0.0 <= self.discount <= 1.0:
            raise ModelValidationError("discount outside [0, 1]")
        if self.horizon < 1:
            raise ModelValidationError("horizon must be at least 1")

    def attack_reward(self, target: int, protected: bool) -> float:
        pr = self.p if protected else self.q
        return self.L - pr * self.L_c[target] + (1.0 - pr) * self.b


LABELS = {
    "leader_states": tuple(f"Target {i + 1} Protected" for i in range(N_TARGETS)) + ("Attacked",),
    "follower_states": tuple(f"Target {i + 1}" for i in range(N_TARGETS)) + ("Attacked",),
    "leader_actions": tuple(f"Protect Target {i + 1}" for i in range(N_TARGETS)),
    "follower_actions": ("Attack", "Move to next target", "Move to previous target"),
    "observations": tuple(f"Target {i + 1}" for i in range(N_TARGETS)) + ("Attacked",),
}


def gen_egg_example(cfg: EggExampleConfig = EggExampleConfig()) -> PosgModel:
    n = N_TARGETS + 1
    nA = N_TARGETS
    conf = np.asarray(cfg.confusion, dtype=float)
    K = np.zeros((n, n, nA, nA, n, n, n))
    R = np.zeros((n, n, nA, nA))
    for sL in range(n):
        for sF in range(n):
            for aL in range(nA):
                for aF in range(nA):
                    k = K[sL, sF, aL, aF]
                    if sL == ATTACKED or sF == ATTACKED:
                        k[ATTACKED, ATTACKED, ATTACKED] = 1.0
                        R[sL, sF, aL, aF] = 0.0 if sL == ATTACKED else cfg.C
                        continue
                    if aF == ATTACK:
                        protected = aL == sF
                        pr = cfg.p if protected else cfg.q
                        R[sL, sF, aL, aF] = cfg.attack_reward(sF, protected)
                        k[ATTACKED, aL, ATTACKED] += pr
                        k[:, aL, sF] += (1.0 - pr) * conf[sF]
                    else:
                        R[sL, sF, aL, aF] = cfg.L
                        step = 1 if aF == MOVE_NEXT else -1
                        nxt = (sF + step) % N_TARGETS
                        k[:, aL, nxt] += conf[nxt]
    desc = (f"egg example: L={cfg.L}, L_c={list(cfg.L_c)}, b={cfg.b}, p={cfg.p}, q={cfg.q}, "
            f"C={cfg.C}, horizon={cfg.horizon}")
    return PosgModel(K, R, cfg.discount, np.asarray(cfg.initial_belief), labels=LABELS,
                     name="liquid-egg", description=desc)

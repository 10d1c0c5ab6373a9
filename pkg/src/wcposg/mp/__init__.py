"""LP / MIP kernel.

``solve_lp`` and ``solve_mip`` dispatch to the native dense simplex and
branch-and-bound, or to HiGHS, according to ``MpConfig.backend``. MIP
answers are polished: binaries are rounded and the continuous part is
re-solved as an LP, so big-M slack never leaks into reported values.
"""
from __future__ import annotations

import numpy as np

from ..config import MpConfig
from .bnb import solve_mip_native
from .program import MathProgram, MpSolution, SolverFailure, Status, to_lp_format
from .simplex import solve_lp_native

__all__ = [
    "MathProgram", "MpSolution", "SolverFailure", "Status", "solve_lp", "solve_mip",
    "to_lp_format", "enumerate_mip",
]


def solve_lp(p: MathProgram, cfg: MpConfig | None = None) -> MpSolution:
    cfg = cfg or MpConfig()
    if p.binaries:
        raise ValueError("solve_lp called on a program with binary variables")
    if cfg.backend == "native":
        return solve_lp_native(p, cfg)
    from .highs import solve_lp_highs
    sol = solve_lp_highs(p, cfg)
    if sol.status == Status.SOLVE_ERROR:
        return solve_lp_native(p, cfg)
    return sol


def solve_mip(p: MathProgram, cfg: MpConfig | None = None, incumbent=None,
              polish: bool = True) -> MpSolution:
    cfg = cfg or MpConfig()
    if not p.binaries:
        return solve_lp(p, cfg)
    if cfg.backend == "native":
        sol = solve_mip_native(p, cfg, incumbent)
    else:
        from .highs import solve_mip_highs
        sol = solve_mip_highs(p, cfg, incumbent)
        if sol.status == Status.SOLVE_ERROR:
            sol = solve_mip_native(p, cfg, incumbent)
    if not sol.ok or not polish:
        return sol
    return _polish(p, sol, cfg)


def _polish(p: MathProgram, sol: MpSolution, cfg: MpConfig) -> MpSolution:
    bins = list(p.binaries)
    fixed = np.round(sol.x[bins])
    lb, ub = p.lb.copy(), p.ub.copy()
    lb[bins] = fixed
    ub[bins] = fixed
    lp = p.with_bounds(lb, ub).relaxed()
    refined = solve_lp(lp, cfg)
    if not refined.ok:
        return sol
    x = refined.x.copy()
    x[bins] = fixed
    return MpSolution(Status.OPTIMAL, float(p.c @ x), x, sol.nodes)


def enumerate_mip(p: MathProgram, cfg: MpConfig | None = None) -> MpSolution:
    """Exhaustive oracle: one LP per binary pattern. Intended for <= ~12 binaries."""
    import itertools

    cfg = cfg or MpConfig(backend="native")
    bins = list(p.binaries)
    sign = -1.0 if p.sense == "max" else 1.0
    best = None
    for pattern in itertools.product((0.0, 1.0), repeat=len(bins)):
        lb, ub = p.lb.copy(), p.ub.copy()
        lb[bins] = pattern
        ub[bins] = pattern
        if np.any(lb > ub):
            continue
        sol = solve_lp(p.with_bounds(lb, ub).relaxed(), cfg)
        if sol.status == Status.UNBOUNDED:
            return sol
        if sol.ok and (best is None or sign * sol.objective < sign * best.objective - 1e-12):
            best = sol
    return best if best is not None else MpSolution(Status.INFEASIBLE)

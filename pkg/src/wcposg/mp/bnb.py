"""Depth-first branch-and-bound over binary variables."""
from __future__ import annotations

import numpy as np

from ..config import MpConfig
from .program import MathProgram, MpSolution, Status
from .simplex import solve_lp_native


def solve_mip_native(p: MathProgram, cfg: MpConfig, incumbent=None) -> MpSolution:
    """Branch on the lowest-index fractional binary; nearer child first.

    ``incumbent`` is an optional feasible point used as the initial bound.
    """
    sign = -1.0 if p.sense == "max" else 1.0
    bins = np.array(p.binaries, dtype=int)
    best_x, best_val = None, np.inf
    if incumbent is not None and p.is_feasible(incumbent, cfg.feasibility_tol):
        best_x = np.asarray(incumbent, dtype=float)
        best_val = sign * p.objective(best_x)
    stack = [(p.lb.copy(), p.ub.copy())]
    nodes = 0
    lp_trouble = False
    while stack:
        if nodes >= cfg.max_nodes:
            return MpSolution(Status.NODE_LIMIT, sign * best_val if best_x is not None
                              else float("nan"), best_x, nodes)
        lb, ub = stack.pop()
        nodes += 1
        sol = solve_lp_native(p.with_bounds(lb, ub).relaxed(), cfg)
        if sol.status == Status.INFEASIBLE:
            continue
        if sol.status == Status.UNBOUNDED:
            return MpSolution(Status.UNBOUNDED, nodes=nodes)
        if sol.status != Status.OPTIMAL:
            lp_trouble = True
            continue
        bound = sign * sol.objective
        if best_x is not None and bound >= best_val - cfg.optimality_gap * max(1.0, abs(best_val)):
            continue
        xb = sol.x[bins] if bins.size else np.zeros(0)
        frac = np.flatnonzero(np.abs(xb - np.round(xb)) > cfg.integrality_tol)
        if frac.size == 0:
            x = sol.x.copy()
            if bins.size:
                x[bins] = np.round(xb)
            best_x, best_val = x, bound
            continue
        j = int(bins[frac[0]])
        down = (lb.copy(), ub.copy())
        down[1][j] = 0.0
        up = (lb.copy(), ub.copy())
        up[0][j] = 1.0
        # stack is LIFO: push the farther child first
        if sol.x[j] >= 0.5:
            stack.extend([down, up])
        else:
            stack.extend([up, down])
    if best_x is None:
        if lp_trouble:
            return MpSolution(Status.ITERATION_LIMIT, nodes=nodes)
        return MpSolution(Status.INFEASIBLE, nodes=nodes)
    return MpSolution(Status.OPTIMAL, sign * best_val, best_x, nodes)

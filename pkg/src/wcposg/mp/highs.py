"""HiGHS backend (via ``highspy``) behind the same program contract."""
from __future__ import annotations

import highspy
import numpy as np

from ..config import MpConfig
from .program import MathProgram, MpSolution, Status

_INF = highspy.kHighsInf


def _build(p: MathProgram, cfg: MpConfig, integral: bool) -> highspy.Highs:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("primal_feasibility_tolerance", min(cfg.feasibility_tol, 1e-9))
    h.setOptionValue("dual_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", cfg.feasibility_tol)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", cfg.optimality_gap)
    h.setOptionValue("mip_max_nodes", cfg.max_nodes)
    h.setOptionValue("simplex_iteration_limit", cfg.max_pivots)
    lp = highspy.HighsLp()
    n, m = p.n_vars, p.n_rows
    lp.num_col_ = n
    lp.num_row_ = m
    lp.col_cost_ = np.asarray(p.c, dtype=float)
    lp.col_lower_ = np.where(np.isneginf(p.lb), -_INF, p.lb)
    lp.col_upper_ = np.where(np.isposinf(p.ub), _INF, p.ub)
    lo = np.where(np.array([s == "<=" for s in p.senses], dtype=bool), -_INF, p.b) if m else np.zeros(0)
    hi = np.where(np.array([s == ">=" for s in p.senses], dtype=bool), _INF, p.b) if m else np.zeros(0)
    lp.row_lower_ = lo
    lp.row_upper_ = hi
    A = p.A
    mat = lp.a_matrix_
    mat.format_ = highspy.MatrixFormat.kRowwise
    mat.num_col_ = n
    mat.num_row_ = m
    rows, cols = np.nonzero(A)  # row-major order
    mat.start_ = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=m))]).astype(np.int32)
    mat.index_ = cols.astype(np.int32)
    mat.value_ = A[rows, cols].astype(float)
    lp.a_matrix_ = mat
    lp.sense_ = highspy.ObjSense.kMaximize if p.sense == "max" else highspy.ObjSense.kMinimize
    if integral and p.binaries:
        kinds = [highspy.HighsVarType.kContinuous] * n
        for j in p.binaries:
            kinds[j] = highspy.HighsVarType.kInteger
        lp.integrality_ = kinds
    h.passModel(lp)
    return h


_STATUS = {
    highspy.HighsModelStatus.kOptimal: Status.OPTIMAL,
    highspy.HighsModelStatus.kInfeasible: Status.INFEASIBLE,
    highspy.HighsModelStatus.kUnbounded: Status.UNBOUNDED,
    highspy.HighsModelStatus.kIterationLimit: Status.ITERATION_LIMIT,
    highspy.HighsModelStatus.kSolutionLimit: Status.NODE_LIMIT,
}


def _solve(p: MathProgram, cfg: MpConfig, integral: bool, incumbent=None) -> MpSolution:
    # presolve off is fastest on these tiny programs; on a failed or unknown
    # outcome retry once with presolve before reporting a solve error
    for presolve in ("off", "on"):
        h = _build(p, cfg, integral)
        h.setOptionValue("presolve", presolve)
        if incumbent is not None and integral and p.binaries:
            sol = highspy.HighsSolution()
            sol.col_value = np.asarray(incumbent, dtype=float)
            sol.value_valid = True
            h.setSolution(sol)
        h.run()
        status = _STATUS.get(h.getModelStatus(), Status.SOLVE_ERROR)
        if status != Status.SOLVE_ERROR:
            break
    if status != Status.OPTIMAL:
        return MpSolution(status)
    x = np.array(h.getSolution().col_value, dtype=float)
    return MpSolution(Status.OPTIMAL, float(p.c @ x), x)


def solve_lp_highs(p: MathProgram, cfg: MpConfig) -> MpSolution:
    return _solve(p, cfg, integral=False)


def solve_mip_highs(p: MathProgram, cfg: MpConfig, incumbent=None) -> MpSolution:
    return _solve(p, cfg, integral=True, incumbent=incumbent)

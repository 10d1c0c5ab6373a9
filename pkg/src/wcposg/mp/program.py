"""Dense linear / mixed-binary program container and its LP-format dump."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"
    NODE_LIMIT = "NodeLimit"
    SOLVE_ERROR = "SolveError"  # backend gave up; callers may retry elsewhere


class SolverFailure(RuntimeError):
    """A program that must be solvable was not solved to optimality."""

    def __init__(self, status, what=""):
        super().__init__(f"{what or 'math program'} ended with status {status}")
        self.status = status


@dataclass(frozen=True, eq=False)
class MathProgram:
    """``opt c.x`` subject to ``A x (<=|=|>=) b``, ``lb <= x <= ub``.

    ``binaries`` lists indices of variables restricted to {0, 1}; their
    bounds are intersected with [0, 1].
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    sense: str = "min"
    binaries: tuple[int, ...] = ()
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        n = c.shape[0]
        A = np.asarray(self.A, dtype=float).reshape(-1, n)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        lb = np.broadcast_to(np.asarray(self.lb, dtype=float), (n,)).copy()
        ub = np.broadcast_to(np.asarray(self.ub, dtype=float), (n,)).copy()
        senses = tuple(self.senses)
        if A.shape[0] != b.shape[0] or len(senses) != b.shape[0]:
            raise ValueError("constraint matrix, senses and rhs disagree in length")
        if any(s not in ("<=", "=", ">=") for s in senses):
            raise ValueError(f"bad constraint sense in {senses}")
        if self.sense not in ("min", "max"):
            raise ValueError(f"objective sense must be 'min' or 'max', not {self.sense!r}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        bins = tuple(sorted(set(int(i) for i in self.binaries)))
        if bins and (bins[0] < 0 or bins[-1] >= n):
            raise ValueError("binary index out of range")
        for i in bins:
            lb[i] = max(lb[i], 0.0)
            ub[i] = min(ub[i], 1.0)
        for name, v in (("c", c), ("A", A), ("b", b), ("lb", lb), ("ub", ub)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "binaries", bins)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.b.shape[0]

    def with_bounds(self, lb, ub) -> "MathProgram":
        return replace(self, lb=lb, ub=ub)

    def relaxed(self) -> "MathProgram":
        return replace(self, binaries=())

    def objective(self, x) -> float:
        return float(self.c @ x)

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        ax = self.A @ x
        viol = [0.0]
        for s, lhs, rhs in zip(self.senses, ax, self.b):
            if s == "<=":
                viol.append(lhs - rhs)
            elif s == ">=":
                viol.append(rhs - lhs)
            else:
                viol.append(abs(lhs - rhs))
        viol.append(np.max(self.lb - x, initial=0.0))
        viol.append(np.max(x - self.ub, initial=0.0))
        if self.binaries:
            xb = x[list(self.binaries)]
            viol.append(np.max(np.abs(xb - np.round(xb))))
        return float(max(viol))

    def is_feasible(self, x, tol: float = 1e-7) -> bool:
        return self.max_violation(x) <= tol


@dataclass(frozen=True, eq=False)
class MpSolution:
    status: Status
    objective: float = float("nan")
    x: np.ndarray | None = None
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL


def _fmt(v: float) -> str:
    return repr(float(v))


def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else "+"
    mag = _fmt(abs(coef))
    if first:
        return f"{'-' if coef < 0 else ''}{mag} {name}"
    return f"{sign} {mag} {name}"


def to_lp_format(p: MathProgram) -> str:
    """Render ``p`` in CPLEX LP text format (readable by HiGHS, CPLEX, Gurobi, GLPK)."""
    names = p.names or tuple(f"x{i}" for i in range(p.n_vars))
    lines = ["\\ generated by wcposg", "Maximize" if p.sense == "max" else "Minimize"]

    def expr(row):
        parts = [_term(c, names[j], not k) for k, (j, c) in
                 enumerate((j, c) for j, c in enumerate(row) if c != 0.0)]
        return " ".join(parts) if parts else f"0 {names[0]}"

    lines.append(f" obj: {expr(p.c)}")
    lines.append("Subject To")
    for i in range(p.n_rows):
        lines.append(f" c{i}: {expr(p.A[i])} {p.senses[i]} {_fmt(p.b[i])}")
    lines.append("Bounds")
    for j in range(p.n_vars):
        lo, hi = p.lb[j], p.ub[j]
        lo_s = "-inf" if np.isneginf(lo) else _fmt(lo)
        hi_s = "+inf" if np.isposinf(hi) else _fmt(hi)
        lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
    if p.binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(names[j] for j in p.binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"

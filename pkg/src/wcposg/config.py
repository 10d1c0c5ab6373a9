"""Configuration records for the solver stack.

Every numerical tolerance used by the package lives here so a run can be
reproduced from a single config object.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

THREADS_ENV_VAR = "WCPOSG_THREADS"


@dataclass(frozen=True)
class MpConfig:
    """Settings for the LP/MIP kernel."""

    backend: str = "highs"  # "highs" or "native"
    feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6
    optimality_gap: float = 1e-8
    pivot_tol: float = 1e-9
    max_pivots: int = 100_000
    bland_after: int = 1000  # consecutive degenerate pivots before Bland's rule
    max_nodes: int = 1_000_000
    segment_exact: bool = True  # two-state envelope gaps by breakpoint enumeration, no MIP

    def __post_init__(self):
        if self.backend not in ("highs", "native"):
            raise ValueError(f"unknown mp backend {self.backend!r}")


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the backward recursion and its three steps."""

    seed: int = 0
    mp: MpConfig = field(default_factory=MpConfig)
    sigma_tol: float = 1e-12  # branches with sigma below this are unreachable
    dedup_tol: float = 1e-10  # componentwise equality for duplicate vectors
    purge_margin: float = 1e-9  # witness LP must beat this margin to keep a vector
    dominance_tol: float = 1e-7  # remove a set when its MIP gap u exceeds this
    certificate_tol: float = 1e-7  # accepted slack on the under-approximation
    witness_tol: float = 1e-9  # two beliefs closer than this are the same point
    approx_max_rounds: int = 50
    selection_formulation: str = "covering"  # or "indicator" (one binary per point and vector)
    dev_mode: str = "exact"  # "exact" (MIP) or "grid"
    dev_grid: int = 20  # lattice resolution when dev_mode == "grid"
    workers: int | None = None

    def __post_init__(self):
        if self.dev_mode not in ("exact", "grid"):
            raise ValueError(f"unknown dev_mode {self.dev_mode!r}")
        if self.selection_formulation not in ("covering", "indicator"):
            raise ValueError(f"unknown selection formulation {self.selection_formulation!r}")

    def n_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        return max(1, int(os.environ.get(THREADS_ENV_VAR, "1")))

    def with_backend(self, backend: str) -> "SolverConfig":
        return replace(self, mp=replace(self.mp, backend=backend))


DEFAULT_CONFIG = SolverConfig()

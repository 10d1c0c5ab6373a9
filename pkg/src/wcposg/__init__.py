"""Worst-case leader-follower POSG solver.

Computes layered (max-min) lower bounds of the leader's worst-case value by
backward recursion with PURGE, DOMINANCE and concave APPROXIMATION steps,
executes the resulting policy, and checks it against a brute-force oracle.
"""
from .config import DEFAULT_CONFIG, MpConfig, SolverConfig
from .egg import EggExampleConfig, gen_egg_example
from .io import load_model, read_artifacts, save_model, write_artifacts
from .model import (ConcaveValueFunction, GammaSet, GammaVector, LayeredValueFunction,
                    ModelValidationError, PosgModel, StructureError, belief_update,
                    eval_concave, eval_layered)
from .oracle import TractabilityError, exact_action, exact_value
from .policy import WorstCasePolicy, best_action
from .simulate import SimConfig, run_study, simulate_trajectory
from .solver import SolveReport, StageResult, solve_finite, solve_infinite

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG", "MpConfig", "SolverConfig", "EggExampleConfig", "gen_egg_example",
    "load_model", "save_model", "read_artifacts", "write_artifacts", "PosgModel",
    "GammaVector", "GammaSet", "LayeredValueFunction", "ConcaveValueFunction",
    "ModelValidationError", "StructureError", "belief_update", "eval_layered", "eval_concave",
    "TractabilityError", "exact_value", "exact_action", "WorstCasePolicy", "best_action",
    "SimConfig", "run_study", "simulate_trajectory", "SolveReport", "StageResult",
    "solve_finite", "solve_infinite",
]

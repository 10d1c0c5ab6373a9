"""Model files and solver artifact directories (JSON, deterministic formatting).

Model file (``format: "wcposg-model"``, ``version: 1``)::

    {"format": "wcposg-model", "version": 1, "name": ..., "description": ...,
     "spaces": {"leader_states": [...], "follower_states": [...],
                "leader_actions": [...], "follower_actions": [...],
                "observations": [...]},
     "kernel": [sL][sF][aL][aF][z'][sL'][sF'],
     "reward": [sL][sF][aL][aF],
     "discount": beta, "initial_belief": [...]}

Artifact directory::

    model.json                the solved model
    report.json               horizon, discount, dev trace, eps trace, bounds, config
    stages/stage_XXX.json     one file per stage (layered sets, concave set, purged sets)
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import jsonschema
import numpy as np

from .config import MpConfig, SolverConfig
from .model import (ConcaveValueFunction, GammaSet, GammaVector, LayeredValueFunction,
                    ModelValidationError, PosgModel)
from .solver import SolveReport, StageResult

FORMAT = "wcposg-model"
VERSION = 1
SPACES = ("leader_states", "follower_states", "leader_actions", "follower_actions",
          "observations")

_names = {"type": "array", "minItems": 1, "items": {"type": "string"}}
_nested = {"type": "array"}

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "version", "spaces", "kernel", "reward", "discount",
                 "initial_belief"],
    "properties": {
        "format": {"const": FORMAT},
        "version": {"const": VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "spaces": {
            "type": "object",
            "required": list(SPACES),
            "properties": {k: _names for k in SPACES},
            "additionalProperties": False,
        },
        "kernel": _nested,
        "reward": _nested,
        "discount": {"type": "number", "minimum": 0, "maximum": 1},
        "initial_belief": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "metadata": {"type": "object"},
    },
    "additionalProperties": False,
}


def _check_shape(data, shape: tuple[int, ...], what: str, path: str = ""):
    """Walk a nested list and name the first entry whose length is wrong."""
    if not shape:
        if not isinstance(data, (int, float)) or isinstance(data, bool):
            raise ModelValidationError(f"{what}{path} must be a number, got {type(data).__name__}")
        return
    if not isinstance(data, list) or len(data) != shape[0]:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise ModelValidationError(f"{what}{path} has {got} entries, expected {shape[0]}")
    for i, sub in enumerate(data):
        _check_shape(sub, shape[1:], what, f"{path}[{i}]")


def model_from_dict(doc: dict) -> PosgModel:
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ModelValidationError(f"schema violation at {where}: {e.message}") from None
    sp = doc["spaces"]
    nL, nF, nAL, nAF, nZ = (len(sp[k]) for k in SPACES)
    _check_shape(doc["kernel"], (nL, nF, nAL, nAF, nZ, nL, nF), "kernel")
    _check_shape(doc["reward"], (nL, nF, nAL, nAF), "reward")
    _check_shape(doc["initial_belief"], (nF,), "initial_belief")
    labels = {k: tuple(sp[k]) for k in SPACES}
    kernel = np.asarray(doc["kernel"], dtype=float)
    sums = kernel.reshape(nL, nF, nAL, nAF, -1).sum(axis=-1)
    off = np.argwhere(np.abs(sums - 1.0) > 1e-9)
    if len(off):
        sL, sF, aL, aF = off[0]
        raise ModelValidationError(
            f"kernel row for s=({sp['leader_states'][sL]}, {sp['follower_states'][sF]}), "
            f"a=({sp['leader_actions'][aL]}, {sp['follower_actions'][aF]}) sums to "
            f"{sums[sL, sF, aL, aF]:.12g}, not 1")
    return PosgModel(kernel, np.asarray(doc["reward"], dtype=float), doc["discount"],
                     np.asarray(doc["initial_belief"], dtype=float), labels=labels,
                     name=doc.get("name", ""), description=doc.get("description", ""))


def model_to_dict(model: PosgModel) -> dict:
    sizes = (model.n_leader_states, model.n_follower_states, model.n_leader_actions,
             model.n_follower_actions, model.n_observations)
    spaces = {k: [model.label(k, i) for i in range(n)] for k, n in zip(SPACES, sizes)}
    return {
        "format": FORMAT,
        "version": VERSION,
        "name": model.name,
        "description": model.description,
        "spaces": spaces,
        "kernel": model.kernel.tolist(),
        "reward": model.reward.tolist(),
        "discount": model.discount,
        "initial_belief": model.initial_belief.tolist(),
    }


def _dump(obj, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def load_model(path) -> PosgModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelValidationError(f"{path}: not valid JSON ({e})") from None
    return model_from_dict(doc)


def save_model(model: PosgModel, path) -> None:
    _dump(model_to_dict(model), Path(path))


# artifacts


def _vec(g: GammaVector) -> dict:
    return {"values": g.values.tolist(), "aL": g.leader_action, "aF": g.follower_action,
            "parents": [list(p) for p in g.parent_choice] if g.parent_choice is not None else None}


def _unvec(d: dict) -> GammaVector:
    par = tuple(tuple(p) for p in d["parents"]) if d["parents"] is not None else None
    return GammaVector(np.asarray(d["values"], dtype=float), d["aL"], d["aF"], par)


def _set(s: GammaSet) -> dict:
    return {"aL": s.leader_action, "vectors": [_vec(g) for g in s.vectors],
            "witnesses": [w.tolist() for w in s.witnesses] if s.witnesses else None}


def _unset(d: dict) -> GammaSet:
    w = tuple(np.asarray(x) for x in d["witnesses"]) if d["witnesses"] else None
    return GammaSet(tuple(_unvec(v) for v in d["vectors"]), d["aL"], w)


def stage_to_dict(st: StageResult) -> dict:
    return {
        "t": st.t,
        "bound": st.bound,
        "eps_star": st.eps_star,
        "capped": list(st.capped),
        "approx_rounds": list(st.approx_rounds),
        "leader_states": [
            {
                "layered": [_set(s) for s in st.layered.sets[sL]],
                "purged": [_set(s) for s in st.purged[sL]],
                "concave": [_vec(g) for g in st.concave.vectors[sL]],
                "witnesses": [w.tolist() for w in st.concave.witnesses[sL]],
                "epsilon": st.concave.errors[sL],
            }
            for sL in range(st.layered.n_leader_states)
        ],
    }


def stage_from_dict(d: dict) -> StageResult:
    per = d["leader_states"]
    layered = LayeredValueFunction(tuple(tuple(_unset(s) for s in p["layered"]) for p in per))
    concave = ConcaveValueFunction(
        tuple(tuple(_unvec(v) for v in p["concave"]) for p in per),
        tuple(tuple(np.asarray(w) for w in p["witnesses"]) for p in per),
        tuple(p["epsilon"] for p in per))
    purged = tuple(tuple(_unset(s) for s in p["purged"]) for p in per)
    return StageResult(d["t"], layered, concave, purged, tuple(d["capped"]), d["bound"],
                       tuple(d["approx_rounds"]))


def write_artifacts(out_dir, model: PosgModel, report: SolveReport,
                    config: SolverConfig | None = None) -> Path:
    out = Path(out_dir)
    save_model(model, out / "model.json")
    for i, st in enumerate(report.stages):
        _dump(stage_to_dict(st), out / "stages" / f"stage_{i:03d}.json")
    doc = {
        "horizon": report.horizon,
        "discount": report.discount,
        "n_stages": len(report.stages),
        "dev": report.dev,
        "eps_trace": report.eps_trace,
        "termination": report.termination,
        "limit_bound": report.limit_bound,
        "bounds": [st.bound for st in report.stages],
        "config": asdict(config) if config is not None else None,
    }
    (out / "report.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return out


def read_artifacts(art_dir) -> tuple[PosgModel, SolveReport, SolverConfig | None]:
    d = Path(art_dir)
    if not (d / "report.json").exists():
        raise ModelValidationError(f"{d} is not an artifact directory (no report.json)")
    model = load_model(d / "model.json")
    doc = json.loads((d / "report.json").read_text())
    stages = [stage_from_dict(json.loads((d / "stages" / f"stage_{i:03d}.json").read_text()))
              for i in range(doc["n_stages"])]
    report = SolveReport(stages, doc["horizon"], doc["discount"], doc["dev"], doc["eps_trace"],
                         doc["termination"], doc["limit_bound"])
    cfg = None
    if doc.get("config"):
        c = dict(doc["config"])
        c["mp"] = MpConfig(**c["mp"])
        cfg = SolverConfig(**c)
    return model, report, cfg

"""APPROXIMATION step: a concave lower envelope chosen from the layered vectors.

The selection is refined on a growing set of belief points ``W``: a
selection MIP on ``W``, a verification MIP over the whole simplex (adds a
violating point), and a max-gap MIP (adds the worst point), repeated until
``W`` stops growing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .envelopes import big_m, max_envelope_gap, maxmin_value
from .model import GammaSet, GammaVector, StructureError, snap_to_simplex
from .mp import MathProgram, SolverFailure, solve_mip

log = logging.getLogger(__name__)


@dataclass
class WitnessSet:
    """Belief points with the layered value cached at each."""

    points: list[np.ndarray]
    values: list[float]
    tol: float = 1e-9

    @property
    def N(self) -> int:
        return len(self.points)

    def contains(self, x) -> bool:
        return any(np.max(np.abs(p - x)) <= self.tol for p in self.points)

    def add(self, x, value: float) -> bool:
        """Append ``x`` unless already present; report whether it was new."""
        if self.contains(x):
            return False
        self.points.append(np.asarray(x, dtype=float))
        self.values.append(float(value))
        return True

    def matrix(self) -> np.ndarray:
        return np.vstack(self.points)


def init_witness_set(sets: list[GammaSet], witnesses=None, tol: float = 1e-9) -> WitnessSet:
    """Simplex vertices followed by the purge witnesses, deduplicated."""
    if not sets:
        raise StructureError("cannot approximate an empty layered function")
    mats = [s.matrix for s in sets]
    n = mats[0].shape[1]
    W = WitnessSet([], [], tol)
    extra = list(witnesses) if witnesses is not None else [
        w for s in sets for w in (s.witnesses or ())]
    for x in list(np.eye(n)) + extra:
        x = snap_to_simplex(x)
        W.add(x, float(maxmin_value(mats, x)))
    return W


def _flatten(sets: list[GammaSet]):
    vecs, owner = [], []
    for k1, s in enumerate(sets):
        for g in s.vectors:
            vecs.append(g)
            owner.append(k1)
    return vecs, np.array(owner)


@dataclass
class SelectionResult:
    selected: np.ndarray  # indices into the flattened vector list
    gap: float  # max over W of (layered - concave)
    objective: float  # N g - sum z~


def _selection_program(W: WitnessSet, G: np.ndarray, formulation: str = "covering",
                       tol: float = 1e-9):
    """MIP over selections; ``formulation`` picks how ``z~_i = min`` over the selection is forced.

    ``"indicator"`` uses one binary per (point, vector) marking the minimiser.
    ``"covering"`` replaces those with one row per point: some selected vector
    lies at or below ``z^i``. Both have the same optimal selections because the
    objective pushes each ``z~_i`` up to the selected minimum.
    """
    N, nG = W.N, G.shape[0]
    X = W.matrix()
    z = np.array(W.values)
    vals = X @ G.T  # (N, nG)
    M = big_m(G)
    indicator = formulation == "indicator"
    iy = 0
    ieta = nG
    izt = nG + (N * nG if indicator else 0)
    ig = izt + N
    n_vars = ig + 1
    rows, senses, rhs = [], [], []

    def new_row(sense, b):
        r = np.zeros(n_vars)
        rows.append(r)
        senses.append(sense)
        rhs.append(b)
        return r

    for i in range(N):
        for j in range(nG):
            r = new_row("<=", vals[i, j] + M)
            r[izt + i] = 1.0
            r[iy + j] = M
        if indicator:
            for j in range(nG):
                e = ieta + i * nG + j
                r = new_row("<=", -vals[i, j] + M)
                r[izt + i] = -1.0
                r[e] = M
                r = new_row("<=", 0.0)
                r[e] = 1.0
                r[iy + j] = -1.0
            r = new_row("=", 1.0)
            r[ieta + i * nG: ieta + (i + 1) * nG] = 1.0
        else:
            r = new_row(">=", 1.0)
            r[iy + np.flatnonzero(vals[i] <= z[i] + tol)] = 1.0
        r = new_row("<=", -z[i])
        r[ig] = -1.0
        r[izt + i] = -1.0
    r = new_row(">=", 1.0)
    r[iy: iy + nG] = 1.0
    r = new_row("<=", nG - 1.0)
    r[iy: iy + nG] = 1.0
    c = np.zeros(n_vars)
    c[ig] = N
    c[izt: izt + N] = -1.0
    lb = np.zeros(n_vars)
    ub = np.ones(n_vars)
    lb[izt: izt + N] = -M / 2.0
    ub[izt: izt + N] = z  # z~ <= z on W
    lb[ig], ub[ig] = 0.0, M
    prog = MathProgram(c=c, A=np.array(rows), senses=senses, b=rhs, lb=lb, ub=ub,
                       sense="min", binaries=list(range(0, izt)))
    return prog, (iy, ieta if indicator else None, izt, ig)


def selection_objective(W: WitnessSet, G: np.ndarray, selected) -> tuple[float, float, np.ndarray]:
    """``(gap, objective, z~)`` of a given selection on ``W``."""
    sel = np.asarray(sorted(selected))
    zt = (W.matrix() @ G[sel].T).min(axis=1)
    gap = max(float(np.max(np.array(W.values) - zt)), 0.0)
    return gap, W.N * gap - float(zt.sum()), zt


def selection_point(W: WitnessSet, G: np.ndarray, selected,
                    formulation: str = "covering") -> np.ndarray:
    """Full MIP variable vector encoding a given selection on ``W``."""
    nG, N = G.shape[0], W.N
    sel = np.asarray(sorted(selected))
    gap, _, zt = selection_objective(W, G, sel)
    indicator = formulation == "indicator"
    izt = nG + (N * nG if indicator else 0)
    x = np.zeros(izt + N + 1)
    x[sel] = 1.0
    if indicator:
        vals = W.matrix() @ G[sel].T
        for i in range(N):
            x[nG + i * nG + sel[int(np.argmin(vals[i]))]] = 1.0
    x[izt: izt + N] = zt
    x[izt + N] = gap
    return x


def concave_approx_mip(W: WitnessSet, sets: list[GammaSet], cfg: SolverConfig = DEFAULT_CONFIG,
                       warm_start=None) -> SelectionResult:
    """Choose the subset minimising ``N g - sum_i z~_i`` on ``W``."""
    vecs, owner = _flatten(sets)
    G = np.vstack([g.values for g in vecs])
    if G.shape[0] < 2:
        raise StructureError("selection MIP needs at least two vectors")
    form = cfg.selection_formulation
    prog, (iy, ieta, izt, ig) = _selection_program(W, G, form)
    incumbent = None
    if warm_start is not None:
        incumbent = selection_point(W, G, warm_start, form)
        if not prog.is_feasible(incumbent, cfg.mp.feasibility_tol):
            raise StructureError("warm-start selection is not feasible for the selection MIP")
    sol = solve_mip(prog, cfg.mp, incumbent=incumbent)
    if not sol.ok:
        raise SolverFailure(sol.status, "concave approximation MIP")
    selected = np.flatnonzero(np.round(sol.x[iy: iy + G.shape[0]]) > 0.5)
    # re-evaluate exactly at the chosen selection
    gap, obj, _ = selection_objective(W, G, selected)
    return SelectionResult(selected, gap, obj)


def verify_lower_bound(concave: np.ndarray, sets: list[GammaSet],
                       cfg: SolverConfig = DEFAULT_CONFIG):
    """``(mu*, x*)`` with ``mu* = min_x [layered - concave]``."""
    gap, x = max_envelope_gap([np.atleast_2d(concave)], [s.matrix for s in sets], cfg.mp,
                              "verification MIP")
    return -gap, x


def approx_error(concave: np.ndarray, sets: list[GammaSet], cfg: SolverConfig = DEFAULT_CONFIG):
    """``(eps, x')`` with ``eps = max_x [layered - concave]``."""
    gap, x = max_envelope_gap([s.matrix for s in sets], [np.atleast_2d(concave)], cfg.mp,
                              "approximation error MIP")
    return max(gap, 0.0), x


@dataclass
class ApproxResult:
    vectors: list[GammaVector]
    witnesses: list[np.ndarray]
    epsilon: float
    W: WitnessSet
    certificate: float  # final mu*, >= -tol
    mip_objective: float | None = None  # last selection objective on the final W
    single_set_objectives: list[float] = field(default_factory=list)
    rounds: list[dict] = field(default_factory=list)
    capped: bool = False
    bypass: bool = False


def _vector_witnesses(vecs, idx, W: WitnessSet, fallback):
    """A belief per selected vector: a W point where it is the minimiser, else its purge witness."""
    X = W.matrix()
    G = np.vstack([vecs[i].values for i in idx])
    arg = np.argmin(X @ G.T, axis=1)
    out = []
    for pos, i in enumerate(idx):
        hits = np.flatnonzero(arg == pos)
        if hits.size:
            out.append(X[hits[0]])
        elif fallback[i] is not None:
            out.append(fallback[i])
        else:
            out.append(np.full(X.shape[1], 1.0 / X.shape[1]))
    return out


def approximate(sets: list[GammaSet], cfg: SolverConfig = DEFAULT_CONFIG,
                rng: np.random.Generator | None = None) -> ApproxResult:
    """Concave under-approximation of the layered function given by ``sets``."""
    if not sets:
        raise StructureError("cannot approximate an empty layered function")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    vecs, owner = _flatten(sets)
    fallback = [w for s in sets for w in (s.witnesses or (None,) * len(s))]
    W = init_witness_set(sets, tol=cfg.witness_tol)
    if len(sets) == 1:
        s = sets[0]
        wit = list(s.witnesses) if s.witnesses else _vector_witnesses(
            vecs, list(range(len(vecs))), W, fallback)
        return ApproxResult(list(s.vectors), wit, 0.0, W, 0.0, bypass=True)
    G = np.vstack([g.values for g in vecs])
    mats = [s.matrix for s in sets]
    tol = cfg.certificate_tol

    def warm():
        w = W.points[int(rng.integers(W.N))]
        k = int(np.argmax([float((m @ w).min()) for m in mats]))
        return np.flatnonzero(owner == k)

    certified = None  # (selected idx, mu, eps, x')
    rounds = []
    capped = True
    for n_round in range(cfg.approx_max_rounds):
        start = warm()
        res = concave_approx_mip(W, sets, cfg, warm_start=start)
        _, warm_obj, _ = selection_objective(W, G, start)
        if res.objective > warm_obj + 1e-6 * max(1.0, abs(warm_obj)):
            raise StructureError("selection MIP returned a worse point than its warm start")
        mu, xstar = verify_lower_bound(G[res.selected], sets, cfg)
        info = {"round": n_round, "N": W.N, "objective": res.objective, "gap_on_W": res.gap,
                "mu": mu, "selected": res.selected.tolist()}
        rounds.append(info)
        if mu < -tol:
            added = W.add(xstar, float(maxmin_value(mats, xstar)))
            info["added"] = "violation"
            if not added:
                # the violating point is already in W; the selection MIP must exclude it
                raise StructureError("verification point already in W; numerical trouble")
            continue
        eps, xprime = approx_error(G[res.selected], sets, cfg)
        info["epsilon"] = eps
        certified = (res.selected, mu, eps, res.objective)
        if not W.add(xprime, float(maxmin_value(mats, xprime))):
            capped = False
            break
        info["added"] = "max-gap"
    if certified is None:
        # fall back to a single whole set: always below the layered envelope
        sel = warm()
        mu, _ = verify_lower_bound(G[sel], sets, cfg)
        eps, _ = approx_error(G[sel], sets, cfg)
        certified = (sel, mu, eps, None)
    if capped:
        log.warning("approximation hit the %d-round cap; returning the last certified selection",
                    cfg.approx_max_rounds)
    sel, mu, eps, obj = certified
    single = []
    for k in range(len(sets)):
        single.append(selection_objective(W, G, np.flatnonzero(owner == k))[1])
    final_obj = selection_objective(W, G, sel)[1]
    return ApproxResult([vecs[i] for i in sel], _vector_witnesses(vecs, list(sel), W, fallback),
                        eps, W, mu, final_obj, single, rounds, capped)

"""Acceptance criteria 1-11. Each test records one pass/fail line in the terminal summary."""
import filecmp
import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from wcposg.approx import _flatten, approximate, concave_approx_mip, init_witness_set, \
    selection_objective
from wcposg.cli import main as cli
from wcposg.dominance import dominance_mip, pairwise_dominated, prune_sets
from wcposg.egg import ATTACKED, gen_egg_example
from wcposg.envelopes import maxmin_value
from wcposg.generators import dominant_action_model, random_model
from wcposg.io import save_model
from wcposg.model import GammaSet, GammaVector, eval_concave, eval_layered, simplex_lattice
from wcposg.backup import purge
from wcposg.oracle import exact_values
from wcposg.policy import WorstCasePolicy
from wcposg.simulate import SimConfig, run_study
from wcposg.solver import solve_finite, solve_infinite

pytestmark = pytest.mark.acceptance


def gset(rows, aL=0):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return GammaSet(tuple(GammaVector(r, aL, j) for j, r in enumerate(rows)), aL)


def lattice_at_least(n, count):
    k = 1
    while simplex_lattice(n, k).shape[0] < count:
        k += 1
    return simplex_lattice(n, k)


# criteria 1 and 3 share one suite of solved models

@pytest.fixture(scope="module")
def sandwich_suite():
    rows = []  # (model, t, sL, lower, layered, exact, bound)
    start = time.perf_counter()
    for m in range(25):
        rng = np.random.default_rng(1000 + m)
        nL, nF = (int(v) for v in rng.integers(2, 4, size=2))
        model = random_model(rng, nL, nF, 2, 2, 2, 0.9)
        rep = solve_finite(model, 3)
        for t in range(3):
            st = rep.stage(t)
            for sL in range(nL):
                X = rng.dirichlet(np.ones(nF), size=100)
                rows.append((m, t, sL, eval_concave(st.concave, sL, X),
                             eval_layered(st.layered, sL, X), exact_values(model, t, sL, X, 3),
                             st.bound))
    return rows, time.perf_counter() - start


def test_c1_sandwich(sandwich_suite, criterion):
    rows, secs = sandwich_suite
    low = max(float(np.max(lo - lay)) for _, _, _, lo, lay, _, _ in rows)
    high = max(float(np.max(lay - ex)) for _, _, _, _, lay, ex, _ in rows)
    ok = low <= 1e-6 and high <= 1e-6 and secs < 300
    assert criterion(1, ok, f"max(lower-layered)={low:.2e} max(layered-exact)={high:.2e} "
                            f"({len(rows)} checks, {secs:.0f}s)")


def test_c2_exact_when_no_approximation_error(criterion):
    worst, eps = 0.0, 0.0
    for seed in range(5):
        rng = np.random.default_rng(2000 + seed)
        model = dominant_action_model(rng, nL=2, nF=int(rng.integers(2, 4)), nAL=3, nAF=2)
        rep = solve_finite(model, 3)
        eps = max(eps, max(rep.eps_trace))
        for t in range(3):
            for sL in range(model.n_leader_states):
                X = rng.dirichlet(np.ones(model.n_follower_states), size=100)
                diff = eval_layered(rep.stage(t).layered, sL, X) - exact_values(model, t, sL, X, 3)
                worst = max(worst, float(np.abs(diff).max()))
    ok = eps == 0.0 and worst <= 1e-6
    assert criterion(2, ok, f"max eps*={eps:g} max|layered-exact|={worst:.2e}")


def test_c3_error_bound(sandwich_suite, criterion):
    rows, _ = sandwich_suite
    gap = max(float(np.max(ex - lay)) for *_, lay, ex, _ in rows)
    ratio = max(float(np.max(ex - lay)) / b for *_, lay, ex, b in rows if b > 0)
    slack = min(float(b + 1e-6 - np.max(ex - lay)) for *_, lay, ex, b in rows)
    assert criterion(3, slack >= 0, f"max(exact-layered)={gap:.3f}, at most {ratio:.0%} of "
                                    f"the accumulated bound")


def test_c4_purge(criterion):
    r = np.random.default_rng(4000)
    worst = 0.0
    for _ in range(50):
        n, k = int(r.integers(2, 5)), int(r.integers(5, 41))
        M = np.round(r.normal(size=(k, n)), 1)  # ties and duplicates
        kept, _ = purge([GammaVector(row, 0, i % 2) for i, row in enumerate(M)])
        K = np.vstack([g.values for g in kept])
        X = lattice_at_least(n, 1000)
        worst = max(worst, float(np.abs((X @ K.T).min(axis=1) - (X @ M.T).min(axis=1)).max()))
    assert criterion(4, worst <= 1e-8, f"max envelope difference {worst:.2e} over 50 sets")


def test_c5_dominance(criterion):
    r = np.random.default_rng(5000)
    # (a) half the pairs are dominated by construction
    agree = compared = 0
    for i in range(50):
        n = int(r.integers(2, 4))
        A = r.normal(size=(int(r.integers(1, 5)), n))
        if i % 2:
            B = np.vstack([A + r.uniform(0.05, 1.0, size=A.shape),
                           r.normal(size=(int(r.integers(0, 3)), n)) + 5.0])
        else:
            B = r.normal(size=(int(r.integers(1, 5)), n))
        X = lattice_at_least(n, 2000)
        gap = float(((X @ A.T).min(axis=1) - (X @ B.T).min(axis=1)).max())
        if abs(gap) < 1e-6:
            continue  # the grid cannot decide
        compared += 1
        agree += pairwise_dominated(gset(A), gset(B)) == (gap <= 0)
    # (b) supporting sets on a 0.01 lattice
    mismatches, sets_checked, env_err = 0, 0, 0.0
    for _ in range(30):
        n = int(r.integers(2, 4))
        sets = [gset(r.normal(size=(int(r.integers(1, 4)), n)), aL=k)
                for k in range(int(r.integers(2, 5)))]
        X = simplex_lattice(n, 100)
        mats = [s.matrix for s in sets]
        best = maxmin_value(mats, X)
        for k, s in enumerate(sets):
            grid_keep = bool(np.any((X @ s.matrix.T).min(axis=1) >= best - 1e-9))
            u, _ = dominance_mip(k, sets)
            sets_checked += 1
            mismatches += grid_keep != (u <= 1e-9)
        kept = prune_sets(sets)
        env_err = max(env_err, float(np.abs(maxmin_value([s.matrix for s in kept], X)
                                            - best).max()))
    ok = agree == compared >= 45 and mismatches == 0 and env_err <= 1e-7
    assert criterion(5, ok, f"(a) {agree}/{compared} pairs agree; (b) {mismatches} mismatches "
                            f"over {sets_checked} sets, envelope error {env_err:.1e}")


def brute_force_selection(W, G, tol=1e-9):
    X, z = W.matrix(), np.array(W.values)
    vals = X @ G.T
    best = None
    for size in range(1, G.shape[0]):
        for sub in itertools.combinations(range(G.shape[0]), size):
            if np.any(vals[:, sub].min(axis=1) > z + tol):
                continue
            obj = selection_objective(W, G, sub)[1]
            best = obj if best is None else min(best, obj)
    return best


def test_c6_approximation(criterion):
    r = np.random.default_rng(6000)
    worst_obj, worst_cert, worst_second = 0.0, np.inf, -np.inf
    for _ in range(20):
        n = int(r.integers(2, 4))
        sizes = r.integers(1, 4, size=int(r.integers(2, 4)))
        while sizes.sum() > 10:
            sizes = sizes[:-1]
        sets = [gset(r.normal(size=(int(c), n)), aL=k) for k, c in enumerate(sizes)]
        W = init_witness_set(sets)
        for x in r.dirichlet(np.ones(n), size=4):
            W.add(x, float(maxmin_value([s.matrix for s in sets], x)))
        G = np.vstack([g.values for g in _flatten(sets)[0]])
        mip = concave_approx_mip(W, sets).objective
        worst_obj = max(worst_obj, abs(mip - brute_force_selection(W, G)))
        res = approximate(sets, rng=np.random.default_rng(0))
        worst_cert = min(worst_cert, res.certificate)
        if res.single_set_objectives:
            worst_second = max(worst_second, res.mip_objective - min(res.single_set_objectives))
    ok = worst_obj <= 1e-6 and worst_cert >= -1e-7 and worst_second <= 1e-6
    assert criterion(6, ok, f"max|MIP-enumeration|={worst_obj:.1e} min mu*={worst_cert:.1e} "
                            f"max(objective - best single set)={worst_second:.1e}")


def test_c7_dominant_action(criterion):
    bad = []
    for seed in range(10):
        rng = np.random.default_rng(7000 + seed)
        model = dominant_action_model(rng, nL=2, nF=int(rng.integers(2, 4)), nAL=3, nAF=2)
        for st in solve_finite(model, 3).stages:
            for sL in range(model.n_leader_states):
                layered = {tuple(g.values) for s in st.layered.sets[sL] for g in s.vectors}
                concave = {tuple(g.values) for g in st.concave.vectors[sL]}
                if st.epsilon[sL] != 0.0 or layered != concave or st.layered.K1(sL) != 1:
                    bad.append((seed, st.t, sL))
    assert criterion(7, not bad, f"{len(bad)} (instance, t, sL) with eps>0 or a changed set")


def test_c8_contraction(criterion):
    beta = 0.85
    iters, failures = [], []
    for m in range(10):
        model = random_model(np.random.default_rng(5000 + m), 2, 2, 2, 2, 2, beta)
        rep = solve_infinite(model, 1e-3, 100)
        d = rep.dev
        # iteration n is d[n-1]; check n = 6 .. len(d) - 5
        viol = [n for n in range(6, len(d) - 4) if d[n + 4] > beta ** 4 * d[n - 1] + 1e-9]
        iters.append(str(len(d)))
        if rep.termination != "converged" or viol:
            failures.append(f"model {m}: {rep.termination}, {len(viol)} contraction violations, "
                            f"last dev {d[-2]:.3f}/{d[-1]:.3f}")
    detail = "iterations " + " ".join(iters) + ("; " + "; ".join(failures) if failures else "")
    assert criterion(8, not failures, detail)


def test_c9_egg_first_stage(criterion):
    st = solve_finite(gen_egg_example(), 1).stage(0)
    sizes = [sorted(len(s) for s in st.layered.sets[sL]) for sL in range(3)]
    mat = [np.vstack([s.matrix for s in st.layered.sets[sL]]) for sL in range(4)]
    absorbing = all(np.all(M[:, ATTACKED] == M[0, ATTACKED]) for M in mat)
    ok = (all(s == [1, 2, 2] for s in sizes) and max(st.epsilon) > 0 and absorbing
          and st.layered.K1(ATTACKED) == 1)
    assert criterion(9, ok, f"set sizes {sizes}, eps={[round(e, 3) for e in st.epsilon]}, "
                            f"absorbing column constant={absorbing}")


def test_c10_egg_study(criterion):
    start = time.perf_counter()
    model = gen_egg_example()
    policy = WorstCasePolicy.from_report(solve_finite(model, 4))
    summary = run_study(model, policy, SimConfig(replications=1000, horizon=30, seed=0))
    secs = time.perf_counter() - start
    a = summary.compare("proposed_worst", "random_leader_min_follower")
    b = summary.compare("proposed_random_follower", "proposed_worst")
    ok = a.holds and b.holds and secs < 120
    assert criterion(10, ok, f"proposed-random leader {a.mean_diff:.1f} (lower {a.lower_bound:.1f}), "
                             f"random-worst follower {b.mean_diff:.1f} (lower {b.lower_bound:.1f}), "
                             f"{secs:.0f}s")


def _tree_identical(a: Path, b: Path) -> bool:
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    return files_a == files_b and all(filecmp.cmp(a / f, b / f, shallow=False) for f in files_a)


def test_c11_determinism(tmp_path, criterion):
    save_model(random_model(np.random.default_rng(11), 2, 3, 2, 2, 2, 0.9), tmp_path / "m.json")
    for run in ("a", "b"):
        assert cli(["solve", "--model", str(tmp_path / "m.json"), "--horizon", "3",
                    "--out", str(tmp_path / run), "--seed", "3"]) == 0
        assert cli(["simulate", "--artifacts", str(tmp_path / run), "--reps", "200",
                    "--seed", "9", "--horizon", "10"]) == 0
    same = _tree_identical(tmp_path / "a", tmp_path / "b")
    n = sum(1 for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert criterion(11, same, f"{n} files compared byte for byte")

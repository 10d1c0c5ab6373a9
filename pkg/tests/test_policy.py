import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcposg.generators import random_model
from wcposg.model import (ConcaveValueFunction, GammaSet, GammaVector, LayeredValueFunction,
                          belief_update, eval_concave, eval_layered)
from wcposg.policy import WorstCasePolicy, best_action, leader_belief_step, minimizing_follower
from wcposg.solver import StageResult, solve_finite

TABLE1 = [
    [(916, 723, 746, -100), (906, 906, 906, -100)],
    [(0, 916, 786, -100), (756, 756, 756, -100)],
    [(0, 703, 726, -100)],
]


def policy_of(sets_rows, scale=1.0):
    sets = tuple(GammaSet(tuple(GammaVector(np.asarray(v, float) * scale, aL, j)
                                for j, v in enumerate(rows)), aL)
                 for aL, rows in enumerate(sets_rows))
    n = len(sets_rows[0][0])
    conc = ConcaveValueFunction(((sets[0].vectors[0],),), ((np.full(n, 1 / n),),), (0.0,))
    st_ = StageResult(0, LayeredValueFunction((sets,)), conc, (sets,), (False,))
    return WorstCasePolicy((st_,))


def test_single_vector():
    pol = WorstCasePolicy((StageResult(
        0, LayeredValueFunction(((GammaSet((GammaVector(np.array([1.0, 4.0]), 1, 2),), 1),),)),
        None, (), (False,)),))
    aL, aF, g, v = best_action(pol, 0, 0, [0.25, 0.75])
    assert (aL, aF) == (1, 2) and v == pytest.approx(3.25)


def test_table1_at_first_vertex():
    aL, aF, g, v = best_action(policy_of(TABLE1), 0, 0, [1, 0, 0, 0])
    assert v == pytest.approx(906.0)
    assert aL == 0 and aF == 1  # gamma^{1,2} is the second vector of set 1


def test_tie_picks_lowest_set():
    aL, _, _, v = best_action(policy_of([[(2, 0)], [(0, 2)]]), 0, 0, [0.5, 0.5])
    assert aL == 0 and v == pytest.approx(1.0)


@given(st.integers(0, 10_000), st.floats(0.01, 100.0))
def test_value_and_scaling_invariance(seed, scale):
    r = np.random.default_rng(seed)
    rows = [[tuple(r.normal(size=3)) for _ in range(int(r.integers(1, 4)))] for _ in range(3)]
    x = r.dirichlet(np.ones(3))
    base = policy_of(rows)
    aL, aF, _, v = best_action(base, 0, 0, x)
    assert v == eval_layered(base.stage(0).layered, 0, x)
    aL2, aF2, _, _ = best_action(policy_of(rows, scale), 0, 0, x)
    assert (aL, aF) == (aL2, aF2)


def test_worst_follower_minimises_lookahead():
    m = random_model(np.random.default_rng(13), 2, 2, 2, 2, 2, 0.9)
    rep = solve_finite(m, 3)
    pol = WorstCasePolicy.from_report(rep)
    nxt = rep.stage(1).concave
    for x in np.random.default_rng(0).dirichlet(np.ones(2), size=30):
        for sL in range(2):
            aL, aF, _, _ = best_action(pol, 0, sL, x)
            q = []
            for b in range(2):
                val = x @ m.reward[sL, :, aL, b]
                for z in range(2):
                    for s2 in range(2):
                        sigma, lam = belief_update(m, sL, x, (aL, b), z, s2)
                        if lam is not None:
                            val += 0.9 * sigma * eval_concave(nxt, s2, lam)
                q.append(val)
            assert q[aF] <= min(q) + 1e-7
            assert minimizing_follower(pol, 0, sL, x, aL) == int(np.argmin(q)) or \
                abs(q[0] - q[1]) < 1e-9


def test_stage_indexing_and_alignment(small_model):
    rep = solve_finite(small_model, 3)
    pol = WorstCasePolicy.from_report(rep)
    with pytest.raises(IndexError):
        pol.stage(3)
    al = pol.aligned(5)  # periods 0..5, last one uses the last stage
    assert al.stage(5) is rep.stage(2)
    assert al.stage(4) is rep.stage(1)
    assert al.stage(0) is rep.stage(0)


def test_leader_belief_step_delegates_and_rejects_absent(small_model):
    x = np.array([0.4, 0.6])
    _, lam = belief_update(small_model, 0, x, (1, 0), 1, 1)
    np.testing.assert_array_equal(leader_belief_step(small_model, 0, x, (1, 0), 1, 1), lam)
    from wcposg.model import PosgModel
    K = np.zeros((1, 2, 1, 1, 2, 1, 2))
    K[0, :, 0, 0, 0, 0, 0] = 1.0
    m = PosgModel(K, np.zeros((1, 2, 1, 1)), 0.9, [0.5, 0.5])
    with pytest.raises(RuntimeError):
        leader_belief_step(m, 0, [0.5, 0.5], (0, 0), 1, 0)

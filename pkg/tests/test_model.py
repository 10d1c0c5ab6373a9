from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcposg.model import (ConcaveValueFunction, GammaSet, GammaVector, LayeredValueFunction,
                          ModelValidationError, PosgModel, StructureError, as_belief,
                          belief_update, eval_concave, eval_layered, layered_argmax,
                          simplex_lattice, successor_table)
from wcposg.generators import random_model


def one_action_model(transition, obs):
    """|S^L| = 1, one action each; obs[s', z] is P(z | s')."""
    T = np.asarray(transition, dtype=float)
    O = np.asarray(obs, dtype=float)
    nF, nZ = O.shape
    K = np.zeros((1, nF, 1, 1, nZ, 1, nF))
    for s in range(nF):
        for z in range(nZ):
            K[0, s, 0, 0, z, 0, :] = T[s] * O[:, z]
    return PosgModel(K, np.zeros((1, nF, 1, 1)), 0.9, np.full(nF, 1.0 / nF))


def vs(*rows, aL=0, aF=0):
    return tuple(GammaVector(np.array(r, dtype=float), aL, aF) for r in rows)


def layered(*sets):
    return LayeredValueFunction(((tuple(GammaSet(vs(*s, aL=k), k) for k, s in enumerate(sets))),))


# Table 1 columns (leader states other than Attacked)
TABLE1 = [
    [(916, 723, 746, -100), (906, 906, 906, -100)],
    [(0, 916, 786, -100), (756, 756, 756, -100)],
    [(0, 703, 726, -100)],
]


def test_belief_update_perfect_observation():
    m = one_action_model(np.eye(2), np.eye(2))
    sigma, lam = belief_update(m, 0, [0.5, 0.5], (0, 0), 0, 0)
    assert sigma == pytest.approx(0.5)
    np.testing.assert_allclose(lam, [1.0, 0.0])


def test_belief_update_uninformative():
    m = one_action_model(np.eye(2), np.ones((2, 1)))
    sigma, lam = belief_update(m, 0, [0.3, 0.7], (0, 0), 0, 0)
    assert sigma == pytest.approx(1.0)
    np.testing.assert_allclose(lam, [0.3, 0.7])


def test_belief_update_noisy_channel_hand_bayes():
    # predicted (0.66, 0.34); z=0 likelihoods (0.8, 0.2) -> (0.528, 0.068) / 0.596
    m = one_action_model([[0.9, 0.1], [0.3, 0.7]], [[0.8, 0.2], [0.2, 0.8]])
    sigma, lam = belief_update(m, 0, [0.6, 0.4], (0, 0), 0, 0)
    assert sigma == pytest.approx(0.596, abs=1e-12)
    np.testing.assert_allclose(lam, [132 / 149, 17 / 149], atol=1e-12)
    sigma1, lam1 = belief_update(m, 0, [0.6, 0.4], (0, 0), 1, 0)
    assert sigma + sigma1 == pytest.approx(1.0)
    np.testing.assert_allclose(lam1, np.array([0.132, 0.272]) / 0.404, atol=1e-12)


def test_belief_update_absent_branch():
    m = one_action_model(np.eye(2), np.eye(2))
    sigma, lam = belief_update(m, 0, [1.0, 0.0], (0, 0), 1, 0)
    assert sigma == 0.0 and lam is None


@given(st.integers(0, 10_000))
def test_belief_update_sigmas_sum_to_one_and_posteriors_are_beliefs(seed):
    r = np.random.default_rng(seed)
    m = random_model(r, 2, 3, 2, 2, 2, sparsity=0.5)
    x = r.dirichlet(np.ones(3))
    a = (int(r.integers(2)), int(r.integers(2)))
    total = 0.0
    sig_tab, _ = successor_table(m, 1, x, a)
    for z in range(2):
        for s2 in range(2):
            sigma, lam = belief_update(m, 1, x, a, z, s2)
            assert sigma == pytest.approx(sig_tab[z, s2], abs=1e-14)
            total += sigma
            if lam is not None:
                as_belief(lam, 3)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_eval_layered_examples():
    assert eval_layered(layered([(1, 1)]), 0, [0.3, 0.7]) == pytest.approx(1.0)
    assert eval_layered(layered([(2, 0)], [(0, 2)]), 0, [0.5, 0.5]) == pytest.approx(1.0)
    assert eval_layered(layered(*TABLE1), 0, [1, 0, 0, 0]) == pytest.approx(906.0)


def test_eval_layered_batch_matches_pointwise(rng):
    v = layered(*TABLE1)
    X = rng.dirichlet(np.ones(4), size=50)
    batch = eval_layered(v, 0, X)
    np.testing.assert_allclose(batch, [eval_layered(v, 0, x) for x in X])


def concave(*rows):
    return ConcaveValueFunction((vs(*rows),), ((np.full(len(rows[0]), 1.0 / len(rows[0])),) * len(rows),), (0.0,))


def test_eval_concave_examples():
    assert eval_concave(concave((1, 0), (0, 1)), 0, [0.5, 0.5]) == pytest.approx(0.5)
    assert eval_concave(concave((3.5, 3.5, 3.5)), 0, [0.2, 0.3, 0.5]) == pytest.approx(3.5)


def test_eval_concave_matches_dense_grid(rng):
    G = rng.normal(size=(5, 3))
    v = concave(*G)
    X = simplex_lattice(3, 43)[:1000]
    np.testing.assert_allclose(eval_concave(v, 0, X), (X @ G.T).min(axis=1), atol=1e-10)


def test_layered_argmax_tie_breaks_to_lowest_index():
    v = layered([(2, 0)], [(0, 2)])
    k1, k2, val = layered_argmax(v, 0, np.array([0.5, 0.5]))
    assert (k1, k2, val) == (0, 0, pytest.approx(1.0))
    k1, _, _ = layered_argmax(v, 0, np.array([0.2, 0.8]))
    assert k1 == 1


@given(st.integers(1, 4), st.integers(0, 6))
def test_simplex_lattice_counts(n, k):
    X = simplex_lattice(n, k) if k > 0 or n == 1 else None
    if X is None:
        return
    assert len(X) == comb(k + n - 1, n - 1)
    np.testing.assert_allclose(X.sum(axis=1), 1.0)


def test_model_validation_rejects_bad_rows():
    m = random_model(np.random.default_rng(0))
    K = m.kernel.copy()
    K[1, 0, 1, 0] *= 0.99
    with pytest.raises(ModelValidationError, match=r"s=\(1,0\), a=\(1,0\)"):
        PosgModel(K, m.reward, 0.9, m.initial_belief)
    with pytest.raises(ModelValidationError):
        PosgModel(m.kernel, m.reward[..., :1], 0.9, m.initial_belief)
    with pytest.raises(ModelValidationError):
        PosgModel(m.kernel, m.reward, 1.2, m.initial_belief)
    with pytest.raises(ModelValidationError):
        PosgModel(m.kernel, m.reward, 0.9, [0.7, 0.7])


def test_belief_validation():
    with pytest.raises(ModelValidationError):
        as_belief([0.5, 0.6])
    with pytest.raises(ModelValidationError):
        as_belief([1.2, -0.2])
    with pytest.raises(ModelValidationError):
        as_belief([1.0], 2)


def test_gamma_set_structure():
    with pytest.raises(StructureError):
        GammaSet((), 0)
    with pytest.raises(StructureError):
        GammaSet((GammaVector(np.ones(2), 1, 0),), 0)
    with pytest.raises(StructureError):
        GammaVector(np.array([np.inf, 0.0]), 0, 0)

import numpy as np
import pytest

from wcposg.egg import ATTACK, ATTACKED, MOVE_NEXT, EggExampleConfig, default_confusion, gen_egg_example
from wcposg.model import ModelValidationError
from wcposg.solver import solve_finite


def test_degenerate_probabilities():
    cfg = EggExampleConfig(p=0.0, q=1.0, b=0.0)
    m = gen_egg_example(cfg)
    for i in range(3):
        assert m.reward[i, i, i, ATTACK] == cfg.L
        for j in range(3):
            if j != i:
                assert m.reward[j, i, j, ATTACK] == pytest.approx(cfg.L - cfg.L_c[i])


def test_reward_template_and_absorption():
    cfg = EggExampleConfig()
    m = gen_egg_example(cfg)
    assert m.kernel.shape == (4, 4, 3, 3, 4, 4, 4)
    for sL in range(3):
        for i in range(3):
            assert m.reward[sL, i, i, ATTACK] == pytest.approx(
                cfg.L - cfg.p * cfg.L_c[i] + (1 - cfg.p) * cfg.b)
            assert m.reward[sL, i, (i + 1) % 3, ATTACK] == pytest.approx(
                cfg.L - cfg.q * cfg.L_c[i] + (1 - cfg.q) * cfg.b)
            assert m.reward[sL, i, 0, MOVE_NEXT] == cfg.L
        assert np.all(m.reward[sL, ATTACKED] == cfg.C)
    assert np.all(m.reward[ATTACKED] == 0.0)
    assert np.all(m.kernel[:, ATTACKED, :, :, ATTACKED, ATTACKED, ATTACKED] == 1.0)
    assert np.all(m.kernel[ATTACKED, :, :, :, ATTACKED, ATTACKED, ATTACKED] == 1.0)


def test_attacks_are_detected_and_observations_follow_confusion():
    cfg = EggExampleConfig()
    m = gen_egg_example(cfg)
    conf = np.asarray(default_confusion())
    # attack at unprotected target 0 while protecting 1
    k = m.kernel[1, 0, 1, ATTACK]
    assert k[ATTACKED, 1, ATTACKED] == pytest.approx(cfg.q)
    np.testing.assert_allclose(k[:, 1, 0], (1 - cfg.q) * conf[0])
    # the follower's location is never observed as Attacked unless attacked
    assert k[ATTACKED, 1, 0] == 0.0


def test_config_validation():
    with pytest.raises(ModelValidationError):
        EggExampleConfig(p=0.7, q=0.6)
    with pytest.raises(ModelValidationError):
        EggExampleConfig(confusion=((1.0, 0.0),))
    cfg = EggExampleConfig(discount=0.85, horizon=30)
    assert gen_egg_example(cfg).discount == 0.85 and "horizon=30" in gen_egg_example(cfg).description


def test_first_stage_structure():
    m = gen_egg_example()
    st = solve_finite(m, 1).stage(0)
    for sL in range(3):
        assert sorted(len(s) for s in st.layered.sets[sL]) == [1, 2, 2]
        mat = np.vstack([s.matrix for s in st.layered.sets[sL]])
        assert np.all(mat[:, ATTACKED] == mat[0, ATTACKED])
    assert st.layered.K1(ATTACKED) == 1
    assert max(st.epsilon[:3]) > 0

import numpy as np
import pytest
from hypothesis import settings

from wcposg.generators import random_model

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_model():
    """2x2x2x2x2 random model, fixed seed."""
    return random_model(np.random.default_rng(7), 2, 2, 2, 2, 2, 0.9)


def random_beliefs(rng, n, k):
    return rng.dirichlet(np.ones(n), size=k)


# acceptance criteria: one pass/fail line each in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE[number] = (bool(ok), detail)
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 12):
        if n not in ACCEPTANCE:
            terminalreporter.write_line(f"criterion {n:2d}: not run")
            continue
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

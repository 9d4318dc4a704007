import sys

import numpy as np
import pytest

from ammsketch.harness import MatrixSpec, make_pair


def instance_spec(seed):
    """Random desk-scale instance: dims <= 32 x 256, target sr in {1, 2, 8}."""
    rng = np.random.default_rng(1000 + seed)
    d_a, d_b = rng.integers(8, 33, size=2)
    n = int(rng.integers(16, 257))
    sr_a, sr_b = rng.choice([1.0, 2.0, 8.0], size=2)
    return MatrixSpec(int(d_a), int(d_b), n, float(sr_a), float(sr_b), seed=seed)


def random_instance(seed):
    return make_pair(instance_spec(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_pair():
    from ammsketch import PairedMatrices
    # A columns (1,0),(0,2); B columns (1,0),(0,1)
    return PairedMatrices(np.array([[1.0, 0.0], [0.0, 2.0]]), np.eye(2))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        passed, detail = mod.RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")

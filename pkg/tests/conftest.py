import numpy as np
import pytest

from rangelab.linalg import ginibre, stream


def random_matrix(n, seed, scale=1.0):
    return scale * ginibre((n, n), stream(seed))


def random_contraction(n, seed, norm=None):
    rng = stream(seed)
    A = ginibre((n, n), rng)
    target = rng.uniform(0.1, 1.0) if norm is None else norm
    return A * (target / np.linalg.norm(A, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])

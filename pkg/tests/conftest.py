import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hdivtest import Dataset  # noqa: E402


def random_dataset(seed, n, K):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, K))
    X = Z @ rng.standard_normal(K) * 0.3 + rng.standard_normal(n)
    Y = 0.7 * X + rng.standard_normal(n) * (1 + 0.5 * np.abs(Z[:, 0]))
    return Dataset(Y, X, Z)


@pytest.fixture
def small_data():
    return random_dataset(6, 6, 3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])

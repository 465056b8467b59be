import sys
from pathlib import Path

import numpy as np
import pytest

from hardness.core import REGRESSION, Dataset

sys.path.insert(0, str(Path(__file__).parent))

A, B, C, D, E, F = range(6)


@pytest.fixture
def fix_c6():
    """Two tight 3-point classes far apart; both columns span [0, 11]."""
    X = np.array([[0, 0], [0, 1], [1, 0], [10, 10], [10, 11], [11, 10]], dtype=float)
    return Dataset.from_labels(X, ["c0", "c0", "c0", "c1", "c1", "c1"], name="fix-c6")


@pytest.fixture
def fix_r4():
    x = np.array([[0.0], [1.0], [2.0], [3.0]])
    return Dataset(x, np.array([0.0, 1.0, 2.0, 3.0]), REGRESSION, name="fix-r4")


def random_classification(seed, n=None, m=None, n_classes=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(8, 61))
    m = m or int(rng.integers(1, 5))
    n_classes = n_classes or int(rng.integers(2, 4))
    X = rng.normal(size=(n, m))
    labels = np.arange(n) % n_classes
    rng.shuffle(labels)
    X += labels[:, None] * rng.uniform(0, 1.5)
    return Dataset.from_labels(X, [f"k{c}" for c in labels], name=f"rand-{seed}")


def random_regression(seed, n=None, m=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(8, 61))
    m = m or int(rng.integers(1, 5))
    X = rng.uniform(size=(n, m))
    y = X @ rng.normal(size=m) + rng.normal(scale=rng.uniform(0.05, 1.0), size=n)
    return Dataset(X, y, REGRESSION, name=f"rand-{seed}")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])

import numpy as np
import pytest

from probout import Dataset


def planted_dataset(seed=42, n_inliers=200, n_outliers=10, radius=10.0, d=3):
    """Unit-Gaussian inliers plus outliers spread on a sphere of ``radius``."""
    rng = np.random.default_rng(seed)
    inliers = rng.standard_normal((n_inliers, d))
    directions = rng.standard_normal((n_outliers, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    points = np.vstack([inliers, radius * directions])
    labels = np.r_[np.zeros(n_inliers, int), np.ones(n_outliers, int)]
    return Dataset(points, labels)


@pytest.fixture
def planted():
    return planted_dataset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def regular_simplex(n):
    """n mutually equidistant points: the standard basis of R^n."""
    return Dataset(np.eye(n))


# acceptance criteria register their outcome here; printed after the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, line = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {line}")

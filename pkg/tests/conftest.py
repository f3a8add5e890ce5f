from pathlib import Path

import numpy as np
import pytest

from ssvh.core import distort_to_weights, weights_to_labels

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

# pass/fail lines emitted by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_instance(rng, K, N, d=None, noise=0.0, b_range=(0.5, 2.0)):
    """Labeled points from the simplex model.

    Returns ``(XS, PiS, V, b, W)`` with ``b`` positive and unit norm.
    """
    d = K if d is None else d
    b = rng.uniform(*b_range, size=K)
    b /= np.linalg.norm(b)
    V = rng.standard_normal((K, d)) + 3 * np.eye(K, d)
    PiS = rng.dirichlet(np.ones(K), size=N)
    W = distort_to_weights(b, PiS)
    XS = W @ V + noise * rng.standard_normal((N, d))
    return XS, PiS, V, b, W


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


__all__ = ["random_instance", "weights_to_labels", "FIXTURES", "ACCEPTANCE_LINES"]

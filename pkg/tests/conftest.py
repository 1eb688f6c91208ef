import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from palmiva import DatasetStack, empirical_covariance  # noqa: E402


def random_stack(rng, K, N, V):
    # correlated across datasets so that off-diagonal blocks are non-trivial
    base = rng.standard_normal((N, V))
    X = np.stack([rng.standard_normal((N, N)) @ (base + rng.standard_normal((N, V))) for _ in range(K)])
    return DatasetStack(X)


def random_cov(rng, K, N, V=None):
    return empirical_covariance(random_stack(rng, K, N, V or 20 * K * N))


def random_W(rng, K, N):
    return rng.standard_normal((K, N, N)) + 2.0 * np.eye(N)


def random_C(rng, N, K, floor=0.2):
    M = rng.standard_normal((N, K, K))
    return np.matmul(M, M.transpose(0, 2, 1)) / K + floor * np.eye(K)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

import numpy as np
import pytest

from mgcdiff import GmmModel, MgcContext

ACCEPTANCE_LINES = []


def random_spd(rng, m, lo=0.1, hi=1.0):
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return (q * rng.uniform(lo, hi, m)) @ q.T


def random_model(rng, m, n, tied=False, spread=1.0, lo=0.1, hi=1.0):
    w = rng.uniform(0.2, 1.0, n)
    w /= w.sum()
    means = rng.uniform(-spread, spread, (n, m))
    if tied:
        covs = np.repeat(random_spd(rng, m, lo, hi)[None], n, axis=0)
    else:
        covs = np.stack([random_spd(rng, m, lo, hi) for _ in range(n)])
    return GmmModel(w, means, covs, tied=tied)


def scalar_context(epsilon=1.0):
    return MgcContext(GmmModel([1.0], [[0.0]], [[[0.5]]], tied=True), epsilon)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scalar_ctx():
    return scalar_context()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from holophase import model


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def random_anti_hermitian(rng, n=4):
    return 1j * random_hermitian(rng, n)


def random_point(rng, low=0.3, high=3.0):
    p = rng.normal(size=5)
    return p * rng.uniform(low, high) / np.linalg.norm(p)


def constant_loop(p=None, n=8):
    p = model.sphere_point(0.7, 0.4) if p is None else p
    return model.make_loop("explicit", points=[p] * (n + 1))


# Acceptance criteria record one line each here; printed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

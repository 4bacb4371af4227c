import numpy as np
import pytest
from scipy.stats import unitary_group

_acceptance = []


def random_hermitian(rng, d):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (x + x.conj().T) / 2


def random_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_projector(rng, d, r=None):
    r = rng.integers(0, d + 1) if r is None else r
    u = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
    v = u[:, :r]
    return v @ v.conj().T


def commuting_projector_pair(rng, d):
    """Two projectors diagonal in one shared random basis."""
    u = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
    mu = rng.integers(0, 2, size=d)
    mv = rng.integers(0, 2, size=d)
    return (u * mu) @ u.conj().T, (u * mv) @ u.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")

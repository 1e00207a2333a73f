import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def dense_1q(gate: np.ndarray, q: int, n: int) -> np.ndarray:
    """Full-register matrix of a one-qubit gate, qubit 0 most significant."""
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, gate if k == q else np.eye(2))
    return out


def dense_2q(gate: np.ndarray, q_low: int, n: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(2**q_low), gate), np.eye(2 ** (n - q_low - 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import settings

from pauliprobe import PureState, pauli_bases


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pauli():
    return pauli_bases()


def columns(basis):
    return [list(basis.vectors[:, k]) for k in range(basis.dim)]


def perturb_state(state, radius, rng):
    """State at Bures distance ``radius`` from ``state`` along a random
    tangent direction."""
    a = state.amplitudes
    z = rng.standard_normal(a.shape[0]) + 1j * rng.standard_normal(a.shape[0])
    z = z - np.vdot(a, z) * a
    z /= np.linalg.norm(z)
    # |<a, cos(s) a + sin(s) z>| = cos(s) and bures = 2 sin(s / 2)
    s = 2.0 * np.arcsin(radius / 2.0)
    return PureState.from_vector(np.cos(s) * a + np.sin(s) * z)


settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion as PASS or FAIL and re-raise."""
    log = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    class _Criterion:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            verdict = "PASS" if exc_type is None else "FAIL"
            line = f"criterion {self.number:>2} {verdict}: {self.title}"
            if self.detail:
                line += f" [{self.detail}]"
            log.append((self.number, line))
            print(line)
            return False

    return _Criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)

import numpy as np
import pytest

# acceptance tests append (criterion, passed, detail) here; the terminal
# summary prints one line per entry after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def record_criterion(name: str, passed: bool, detail: str):
    ACCEPTANCE_LINES.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LINES:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_hermitian(rng, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (a + a.conj().T) / 2.0


def random_local_operator(rng, support, dim_per_site: int = 2):
    from mblsim.chains import LocalOperator

    d = dim_per_site ** len(support)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return LocalOperator(tuple(support), a)

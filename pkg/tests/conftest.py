import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fluorctl.model import AtomConfig

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one (criterion, passed, detail) entry per acceptance check, printed after the run
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_RESULTS.append((criterion, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")


def random_config(rng: np.random.Generator) -> AtomConfig:
    return AtomConfig(gamma1=rng.uniform(0.2, 3.0), gamma2=rng.uniform(0.0, 3.0),
                      omega=rng.uniform(0.0, 6.0), delta=rng.uniform(-3.0, 3.0),
                      omega21=rng.uniform(0.0, 5.0), p=0.0,
                      theta=rng.uniform(0.0, np.pi / 2), dphi=rng.uniform(0.0, 2 * np.pi))

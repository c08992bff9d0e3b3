import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, shown at the end of the run
CRITERIA_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(capsys):
    def record(k: int, passed: bool, detail: str) -> bool:
        line = f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}"
        CRITERIA_LINES[k] = line
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA_LINES):
            terminalreporter.write_line(CRITERIA_LINES[k])

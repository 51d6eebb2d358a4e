import math

import pytest
from hypothesis import HealthCheck, settings

from curved_dirac.model import CouplingParams

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")



@pytest.fixture
def hydrogen_params():
    return CouplingParams(alpha=0.2, eta=0.7, Z=1.2, b=0.2)


@pytest.fixture
def morse_params():
    return CouplingParams(alpha=0.2, eta=math.pi / 3, a=1.0, b=0.3, delta=1.0)


@pytest.fixture
def linear_params():
    return CouplingParams(alpha=0.3, eta=math.pi / 3, a=0.2, b=1.0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

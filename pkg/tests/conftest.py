import pytest
from hypothesis import HealthCheck, settings

from neurorhythm.describing_fn import solve_design_point
from neurorhythm.plant import PlantParams

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def pendulum():
    """Reference pendulum: lambda = 15, xi = 0.1, omega_n = 8."""
    return PlantParams(15.0, 0.1, 8.0)


@pytest.fixture(scope="session")
def design(pendulum):
    return solve_design_point(0.5, pendulum)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import pytest

from narrowbank import ModelParams, PortfolioMatrix, builtin_scenarios, run_scenario

# A variant of the baseline with a lower loan rate. Unlike the baseline it
# has an admissible interior equilibrium, so it is used wherever a test needs
# a trajectory that actually converges.
CONVERGING = ModelParams().replace(r=0.01)


@pytest.fixture(scope="session")
def baseline():
    return ModelParams()


@pytest.fixture(scope="session")
def portfolio():
    return PortfolioMatrix()


@pytest.fixture(scope="session")
def converging():
    return CONVERGING


@pytest.fixture(scope="session")
def builtins():
    return builtin_scenarios()


@pytest.fixture(scope="session")
def bundles(builtins):
    return {name: run_scenario(s) for name, s in builtins.items()}


# PASS/FAIL lines from the acceptance tests, repeated at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

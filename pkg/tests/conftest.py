import pytest
from hypothesis import HealthCheck, settings

from taxonet.fixtures import fig2_source, nstar_network

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def nstar():
    return nstar_network()


@pytest.fixture
def fig2():
    return fig2_source()


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)

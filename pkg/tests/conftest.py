import pytest

from qualia.acceptance import AcceptanceData, acceptance_trials


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance-criterion checks (two full sweeps)")
    config.addinivalue_line("markers", "secondary: checks of the plotting component")


@pytest.fixture(scope="session")
def data():
    """The acceptance sweeps, computed once per session."""
    return AcceptanceData(trials=acceptance_trials())

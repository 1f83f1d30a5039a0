import pytest

from cmtheta.engine import default_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def cm(cfg):
    return cfg.cm


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)

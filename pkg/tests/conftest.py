import pytest

from dop.suites import suite_weights

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def weights():
    return suite_weights()


@pytest.fixture
def acceptance_log():
    def log(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

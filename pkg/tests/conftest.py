import pytest

from inhomcp.model import make_profile

ACCEPTANCE_LINES = []


@pytest.fixture
def homogeneous():
    return make_profile("homogeneous", (0.5, 1.0))


@pytest.fixture
def one_sided():
    return make_profile("one_sided")


@pytest.fixture
def acceptance_log():
    def log(name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

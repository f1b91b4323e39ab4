import pytest

from _helpers import ACCEPTANCE


def pytest_collection_modifyitems(items):
    for item in items:
        if item.name.startswith("test_criterion_"):
            n = int(item.name.split("_")[2])
            ACCEPTANCE.expect(n, item.module.TITLES[n])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE.expected:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE.lines():
        terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    return ACCEPTANCE

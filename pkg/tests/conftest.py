import pytest

from dyboson.rootdata import build_root_data

SIZES = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (2, 2)]


@pytest.fixture(params=SIZES, ids=lambda mn: f"M{mn[0]}N{mn[1]}")
def data(request):
    return build_root_data(*request.param)


@pytest.fixture
def d11():
    return build_root_data(1, 1)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import pytest

# criterion number -> verdict lines, filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, list[str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE_LINES):
        for line in ACCEPTANCE_LINES[criterion]:
            terminalreporter.write_line(line)


@pytest.fixture
def record_acceptance():
    def record(criterion, lines):
        ACCEPTANCE_LINES[criterion] = lines
    return record

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line for the end-of-run acceptance summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(".")[0].split("]")[1])):
            terminalreporter.write_line(line)

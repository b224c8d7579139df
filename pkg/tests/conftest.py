import time

import pytest

_LINES = []


@pytest.fixture
def acceptance(request):
    """record(ok, detail) prints and stores one pass/fail line for the summary."""
    t0 = time.perf_counter()
    name = request.node.name

    def record(ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}  ({time.perf_counter() - t0:.1f} s)"
        print(line)
        _LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)

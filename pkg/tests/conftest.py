import pytest

ACCEPTANCE = {}


@pytest.fixture
def record(request):
    """Store one pass/fail line for a numbered acceptance criterion."""

    def _record(number, ok, note=""):
        ACCEPTANCE[number] = (bool(ok), note)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, note = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {note}")

import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store a one-line verdict for the acceptance summary."""
    def _record(name: str, ok: bool, detail: str) -> None:
        ACCEPTANCE[name] = (ok, detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

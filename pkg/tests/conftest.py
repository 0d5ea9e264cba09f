import pytest

from sectionhdl import sections


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for status in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in getattr(rep, "nodeid", ""):
                continue
            if status != "skipped" and getattr(rep, "when", "call") != "call":
                continue
            name = rep.nodeid.split("::")[-1]
            rows.append((name, status.upper()))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(set(rows)):
            terminalreporter.write_line(f"{status:8} {name}")


@pytest.fixture(autouse=True)
def clean_elaboration():
    """Elaboration context is thread-local module state; make sure a test
    that died mid-build cannot poison the next one."""
    ctx = sections.context()
    ctx.module = None
    ctx.stack = []
    ctx.library = None
    yield
    ctx.module = None
    ctx.stack = []
    ctx.library = None

"""Shared fixtures and the end-of-run acceptance check report."""

import pytest

from swarmpatrol.graph import PatrolGraph, generate_default_map

_CHECKS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def default_graph() -> PatrolGraph:
    return generate_default_map(0)


@pytest.fixture(scope="session")
def check():
    """Record one labelled pass/fail line, then assert it."""

    def _check(label: str, ok: bool, detail: str = "") -> None:
        _CHECKS.append((label, bool(ok), detail))
        suffix = f" ({detail})" if detail else ""
        assert ok, f"{label}: FAIL{suffix}"

    return _check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CHECKS:
        return
    terminalreporter.section("acceptance checks")
    for label, ok, detail in _CHECKS:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status}  {label}{suffix}")

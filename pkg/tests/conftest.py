import os

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for a numbered criterion; printed in the terminal summary."""
    lines = request.config._acceptance_lines

    def record(number: int, title: str, passed: bool, detail: str, seconds: float | None = None) -> bool:
        timing = "" if seconds is None else f" [{seconds:.1f} s]"
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}: {detail}{timing}"
        lines[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])


@pytest.fixture
def tight_budget():
    """Temporarily lower budget caps: ``tight_budget(grid_points=10)``."""
    from dataclasses import asdict

    from ergolab import set_budgets

    saved = []

    def apply(**caps):
        saved.append(set_budgets(**caps))

    yield apply
    if saved:
        set_budgets(**asdict(saved[0]))

import math

import pytest

from landbubble.economy import CES, EconomyParams, Exponential, TwoSectorLinear

GAMMA = math.log(10.0)


@pytest.fixture
def baseline():
    """Cobb-Douglas closed economy: beta 0.95, alpha 0.5, delta 0.08, gamma ln 10."""
    return EconomyParams(beta=0.95, lam=1.0, tech=CES(1.0, 0.5, 1.0, 0.08), dist=Exponential(GAMMA))


@pytest.fixture
def linear():
    """Open economy with m = 0.92, D = 1 and the same productivity law."""
    return EconomyParams(beta=0.95, lam=1.0, tech=TwoSectorLinear(0.92, 1.0), dist=Exponential(GAMMA), upsilon=0.975)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per criterion and fail the test if any check fails."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(number: int, title: str, checks: dict[str, bool]):
        failed = [name for name, ok in checks.items() if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {number:>2} {status}  {title}"
        if failed:
            line += "  (failed: " + "; ".join(failed) + ")"
        lines.append((number, line))
        print(line)
        assert not failed, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

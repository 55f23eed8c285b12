import pytest
from hypothesis import settings

from afrelay.model import SystemParams

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")


@pytest.fixture
def params_a():
    """Baseline: unit end-node powers, R01 = R02 = 1/2 (delta = 1), unit mean gains."""
    return SystemParams(p_s1=1.0, p_s2=1.0, r01=0.5, r02=0.5, omega_x=1.0, omega_y=1.0)


@pytest.fixture
def params_b():
    """p_s1 = 2, p_s2 = 1 with unit thresholds; not balanced."""
    return SystemParams(p_s1=2.0, p_s2=1.0, r01=0.5, r02=0.5)


# acceptance criteria append (number, name, passed, detail) here
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:2d} {name}: {detail}")

import pytest

from bathtub.core import (
    ConstantInflow,
    ConstantVelocity,
    Greenshields,
    Scenario,
    UniformDistribution,
)

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE[number] = (passed, line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n][1])


@pytest.fixture
def constant_v():
    """V = 0.5, L = 10, f = 0.15, uniform phi, zero initial density, T = 8."""
    return Scenario(ConstantVelocity(0.5), 10.0, ConstantInflow(0.15), UniformDistribution(10.0), horizon=8.0)


@pytest.fixture
def small_51():
    """Example 5.1 ingredients on a short horizon for fast unit tests."""
    return Scenario(Greenshields(), 10.0, ConstantInflow(0.15), UniformDistribution(10.0), horizon=2.0)

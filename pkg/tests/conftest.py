import pytest

from rti.equilibrium import FluidConfig, PressureLaw, integrate_hydrostatic

_CRITERIA = {}


def reference_fluid(omega=1.0):
    """Affine laws p+ = rho, p- = 2 rho, P* = 2, g = 1, m = l = 1."""
    return FluidConfig(PressureLaw.affine(1.0), PressureLaw.affine(2.0), g=1.0, omega=omega,
                       m=1.0, l=1.0, interface_pressure=2.0)


@pytest.fixture(scope="session")
def fluid():
    return reference_fluid(1.0)


@pytest.fixture(scope="session")
def fluid0():
    return reference_fluid(0.0)


@pytest.fixture(scope="session")
def profile(fluid):
    return integrate_hydrostatic(fluid, 128)


@pytest.fixture(scope="session")
def profile0(fluid0):
    return integrate_hydrostatic(fluid0, 128)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed in the terminal summary."""
    def record(number, title, passed, detail=""):
        _CRITERIA[number] = (title, bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")

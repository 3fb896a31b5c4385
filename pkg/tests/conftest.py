import pytest

from fluxkit import BasisConfig, FluxoniumParams, TransmonParams
from fluxkit.gatesim import calibrated_pulse, truncate_system
from fluxkit.spectra import solve_fluxonium, solve_transmon

FL3 = FluxoniumParams(2.50, 1.14, 0.89, 0.5)
FL4 = FluxoniumParams(2.36, 1.14, 0.89, 0.5)
TRANSMON = TransmonParams(15.0, 0.3)

# criterion -> (passed, line); filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        passed, line = ACCEPTANCE_LINES[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {key}: {line}")


@pytest.fixture(scope="session")
def basis():
    return BasisConfig()


@pytest.fixture(scope="session")
def fl3_sol(basis):
    return solve_fluxonium(FL3, basis)


@pytest.fixture(scope="session")
def fl4_sol(basis):
    return solve_fluxonium(FL4, basis)


@pytest.fixture(scope="session")
def fl3_sys(fl3_sol):
    return truncate_system(fl3_sol, "fluxonium")


@pytest.fixture(scope="session")
def transmon_sys(basis):
    return truncate_system(solve_transmon(TRANSMON, basis, 3), "transmon")


@pytest.fixture(scope="session")
def fl3_pi_6ns(fl3_sys):
    return calibrated_pulse(fl3_sys, 6.0)


@pytest.fixture(scope="session")
def transmon_pi_6ns(transmon_sys):
    return calibrated_pulse(transmon_sys, 6.0)

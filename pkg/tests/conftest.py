import pytest

from greedy_energy.equilibrium import riesz_interval_reference

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def riesz_refs():
    """Riesz references on [-1, 1] with their M = 101/201/401 discrete ladders."""
    return {s: riesz_interval_reference(s) for s in (0.0, 0.5)}


@pytest.fixture(scope="session")
def log_ladder(riesz_refs):
    return riesz_refs[0.0].ladder


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")

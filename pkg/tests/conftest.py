import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance outcomes, reported once at the end of the session
ACCEPTANCE: dict[str, str] = {}


def record(criterion: str, passed: bool, detail: str = ""):
    ACCEPTANCE[criterion] = f"{criterion}: {'PASS' if passed else 'FAIL'}" + (f"  ({detail})" if detail else "")


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[1].rstrip("ab"))):
        terminalreporter.write_line(ACCEPTANCE[key])

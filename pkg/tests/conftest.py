import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=1000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


import pytest

_ACCEPTANCE = {}


@pytest.fixture
def report(capsys):
    """Print one ``ACnn PASS|FAIL`` line past pytest's capture."""

    def emit(n: int, ok: bool, what: str, detail: str) -> None:
        line = f"AC{n:02d} {'PASS' if ok else 'FAIL'}  {what}: {detail}"
        _ACCEPTANCE[n] = line
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])

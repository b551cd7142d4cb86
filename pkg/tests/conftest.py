import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = {}


@pytest.fixture
def criterion():
    """criterion(k, ok, detail) records a PASS/FAIL line printed at the end of the session."""
    def record(k, ok, detail=""):
        ok = bool(ok)
        prev = _CRITERIA.get(k)
        details = detail if prev is None else f"{prev[1]}; {detail}"
        _CRITERIA[k] = (ok and (prev is None or prev[0]), details)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

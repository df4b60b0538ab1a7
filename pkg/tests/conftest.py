import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.register_profile("ci", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance criteria report: number -> (title, verdict, detail)
CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.when == "call":
        verdict = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        CRITERIA[n] = (title, verdict, detail)
    elif rep.failed or rep.skipped:
        CRITERIA.setdefault(n, (title, "SKIP" if rep.skipped else "FAIL", detail or rep.longreprtext[-200:]))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, verdict, detail = CRITERIA[n]
        terminalreporter.write_line(f"AC{n:>3}  {verdict}  {title}: {detail}")

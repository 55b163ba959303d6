import os

import matplotlib
from hypothesis import HealthCheck, settings

matplotlib.use("Agg")

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        ACCEPTANCE[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for nodeid, report in sorted(ACCEPTANCE.items()):
        name = nodeid.rsplit("::", 1)[1]
        number, title, limit = CRITERIA[name]
        elapsed = CRITERIA.get(f"{name}:elapsed")
        timing = f"{elapsed:.2f} s" if elapsed is not None else "n/a"
        verdict = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {verdict}  {title} ({timing}, limit {limit} s)")

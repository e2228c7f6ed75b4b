import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        _ACCEPTANCE[report.nodeid] = (report.outcome, props.get("summary", ""), report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE, key=lambda s: int(s.split("test_criterion_")[1].split("_")[0])):
        outcome, summary, duration = _ACCEPTANCE[nodeid]
        number = int(nodeid.split("test_criterion_")[1].split("_")[0])
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  ({duration:6.2f} s)  {summary}")

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("criterion") is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ident = item.get_closest_marker("criterion").args[0]
        if hasattr(item, "callspec"):
            ident = f"{ident}[{item.callspec.id}]"
        doc = (item.obj.__doc__ or item.name).strip().splitlines()[0]
        _CRITERIA.append((ident, doc, "PASS" if report.passed else "FAIL"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion, reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for ident, doc, verdict in _CRITERIA:
        terminalreporter.write_line(f"{verdict}  criterion {ident:<9} {doc}")
    failed = sum(v == "FAIL" for _, _, v in _CRITERIA)
    terminalreporter.write_line(f"{len(_CRITERIA) - failed}/{len(_CRITERIA)} acceptance checks passed")

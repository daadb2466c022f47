"""Shared fixtures and the acceptance-criteria summary printed after the run."""

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("abqed", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("abqed")

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "worst": {}})
    if rep.failed:
        entry["failed"].append(item.name)
    for label, value, pick in getattr(item, "_criterion_values", []):
        entry["worst"][label] = pick(value, entry["worst"].get(label, value))


@pytest.fixture
def record(request):
    """record(label, value, lowest=False): the summary line shows the worst value per label."""
    values = []
    request.node._criterion_values = values

    def add(label, value, lowest=False):
        values.append((label, float(value), min if lowest else max))

    return add


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number}: {status}  {entry['title']}"
        if entry["worst"]:
            line += "  [" + ", ".join(f"{k} {v:.2g}" for k, v in entry["worst"].items()) + "]"
        terminalreporter.write_line(line)
        for name in entry["failed"]:
            terminalreporter.write_line(f"    failed: {name}")

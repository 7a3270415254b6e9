import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, text): ties a test to one numbered acceptance criterion",
    )
    config._criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # a criterion passes only if every phase of every test carrying its
    # number passes
    results = item.config._criterion_results
    num, text = marker.args
    entry = results.setdefault(num, {"text": text, "passed": True})
    if report.outcome == "failed":
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        entry = results[num]
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {verdict}  {entry['text']}")

import pytest

_criteria: list[tuple[str, str, float]] = []
_setup_key = pytest.StashKey[float]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # Fixture setup time counts toward the criterion (some train in fixtures).
    if report.when == "setup":
        item.stash[_setup_key] = report.duration
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.passed else "FAIL"
        seconds = report.duration + (item.stash.get(_setup_key, 0.0) if report.when == "call" else 0.0)
        _criteria.append((status, marker.args[0], seconds))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, seconds in _criteria:
        terminalreporter.write_line(f"{status}  {name}  ({seconds:.1f}s)")

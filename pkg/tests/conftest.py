import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args
    measured = "; ".join(v for k, v in item.user_properties if k == "measured")
    prev = _RESULTS.get(number)
    status = "PASS" if rep.passed and (prev is None or prev[1] == "PASS") else "FAIL"
    _RESULTS[number] = (title, status, measured or (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status, measured = _RESULTS[number]
        line = f"{status} criterion {number:2d}: {title}"
        terminalreporter.write_line(line + (f" [{measured}]" if measured else ""))

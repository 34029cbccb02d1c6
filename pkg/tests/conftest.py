import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the current acceptance test."""
    def record(text: str) -> None:
        request.node.user_properties.append(("detail", text))
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = mark.args
        details = [v for k, v in item.user_properties if k == "detail"]
        _RESULTS[number] = (title, "PASS" if rep.passed else "FAIL", "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status, info = _RESULTS[number]
        line = f"AC{number:02d} {status}  {title}"
        if info:
            line += f"  [{info}]"
        tr.write_line(line)
    passed = sum(1 for _, s, _ in _RESULTS.values() if s == "PASS")
    tr.write_line(f"{passed}/{len(_RESULTS)} acceptance criteria passed")

import pytest

_titles: dict[int, str] = {}
_owner: dict[str, int] = {}
_results: dict[int, list[tuple[str, str]]] = {}
_measured: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            k, title = mark.args
            _titles[k] = title
            _owner[item.nodeid] = k


def pytest_runtest_logreport(report):
    k = _owner.get(report.nodeid)
    if k is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _results.setdefault(k, []).append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_titles):
        results = _results.get(k, [])
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "NOT RUN" if not results else ("FAIL" if failed else "PASS")
        detail = f"  [failed: {', '.join(failed)}]" if failed else ""
        terminalreporter.write_line(f"{status:7s} criterion {k}: {_titles[k]}{detail}")
        for line in _measured.get(k, []):
            terminalreporter.write_line(f"        {line}")


@pytest.fixture
def measured(request):
    """Record ``name=value`` lines shown under the test's criterion in the summary."""
    k = _owner.get(request.node.nodeid)
    test = request.node.name

    def record(name, value):
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        line = f"{test}: {name} = {text}"
        print(line)
        if k is not None:
            _measured.setdefault(k, []).append(line)

    return record


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path

import pytest

from cohcheck import checker, glob

# criterion number -> (passed, description), filled by the acceptance suite
CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line for the criterion named by the test's marker."""
    num, text = request.node.get_closest_marker("criterion").args
    CRITERIA[num] = (False, text)
    yield
    CRITERIA[num] = (getattr(request.node, "_passed", False), text)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._passed = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, text): an acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, text = CRITERIA[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {text}")


@pytest.fixture
def cold_caches():
    checker.clear_caches()
    glob.clear_caches()
    yield

import numpy as np
import pytest

from smvmde.core import StrataAllocation

# The quantized two-channel fixture used throughout: u1 = [1,1,2], u2 = [2,2,1].
FIXTURE = np.array([[1, 1, 2], [2, 2, 1]])

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (report.when == "call" or report.failed):
        return
    number, title = marker.args
    ok = _CRITERIA.get(number, (title, True))[1] and report.passed
    _CRITERIA[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA, key=lambda k: (len(k), k)):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")


def random_allocation(rng, m, p):
    """Any valid allocation for (m, p), designations drawn at random."""
    variant = rng.choice(["mvmde", "t", "st", "p"])
    if variant == "mvmde":
        return StrataAllocation.mvmde()
    size = int(rng.integers(1, p + 1))
    core = frozenset(int(k) for k in rng.choice(p, size=size, replace=False))
    t = int(rng.integers(1, m + 1))
    if variant == "t":
        return StrataAllocation.threshold(core, t)
    if variant == "st":
        return StrataAllocation.soft_threshold(core, t, float(rng.choice([0.0, 0.25, 0.5, 1.0, rng.random()])))
    return StrataAllocation.proportional(core)


@pytest.fixture
def fixture_labels():
    return FIXTURE.copy()

import numpy as np
import pytest

from convex_monge.config import PRESETS
from convex_monge.experiment import run_experiment

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, label = marker.args
    entry = _criteria.setdefault(number, {"label": label, "passed": True})
    if rep.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {entry['label']}")


@pytest.fixture(scope="session")
def preset_reports():
    """One experiment per built-in preset, shared across tests."""
    return {name: run_experiment(cfg) for name, cfg in PRESETS.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

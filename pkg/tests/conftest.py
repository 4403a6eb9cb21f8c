import pytest

from cmp3d.config import CmpConfig
from cmp3d.floorplan import build_floorplan
from cmp3d.thermal_solver import build_network


@pytest.fixture(scope="session")
def net8():
    """Full default stack at 8x8 die resolution under a 2x2-core floorplan."""
    fp = build_floorplan(CmpConfig(r=64))
    return build_network(fp, resolution=8)


@pytest.fixture(scope="session")
def net16():
    fp = build_floorplan(CmpConfig(r=16))
    return build_network(fp, resolution=16)


_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        observed = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        _criteria.append((marker.args[0], marker.args[1], report.outcome, observed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, outcome, observed in sorted(_criteria):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] C{number:<2} {text}"
        if observed:
            line += f"  ({observed})"
        terminalreporter.write_line(line)

import math
import re
from dataclasses import replace
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from epsm.params import MetricParams
from epsm.severity import load_vehicle_model
from epsm.synth import make_object

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def model():
    return load_vehicle_model()


@pytest.fixture(scope="session")
def params():
    return MetricParams()


def disk(id, x, y, vx=0.0, vy=0.0, radius=1.0, category="Car"):
    """Object whose footprint diagonal gives exactly ``radius``."""
    side = radius * math.sqrt(2.0)
    o = make_object(id, category, x, y, vx, vy)
    return replace(o, length=side, width=side)


@pytest.fixture(scope="session")
def scenario_dir():
    return Path(str(resources.files("epsm.data").joinpath("scenarios")))


# One PASS/FAIL line per acceptance criterion at the end of the run.
_criteria: dict[int, tuple[str, str]] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or (report.when != "call" and report.passed):
        return
    n, name = int(m.group(1)), m.group(2).replace("_", " ")
    status = {"passed": "PASS", "failed": "FAIL"}.get(report.outcome, report.outcome.upper())
    if _criteria.get(n, (name, ""))[1] != "FAIL":
        _criteria[n] = (name, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        name, status = _criteria[n]
        terminalreporter.write_line(f"criterion {n} ({name}): {status}")

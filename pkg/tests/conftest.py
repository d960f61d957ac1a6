import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("steerkit", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("steerkit")

from steerkit.core import FrameAngle, named_state  # noqa: E402

PROTOCOL = FrameAngle(math.pi / 2, 0.0)


@pytest.fixture
def ghz():
    return named_state("ghz")


@pytest.fixture
def w_state():
    return named_state("w")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one summary line per acceptance criterion

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        doc = getattr(report, "criterion_title", name)
        _ACCEPTANCE[name] = ("PASS" if report.passed else "FAIL", doc)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    title = (item.function.__doc__ or "").strip().splitlines()
    if title:
        rep.criterion_title = title[0]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{status}  {title}")

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# 4 subjects x 2 raters worked by hand: grand mean 3, SS_subjects 9,
# SS_raters 0.5, SS_total 12, SS_error 2.5
HAND = np.array([[1, 2], [2, 4], [5, 4], [3, 3]], dtype=float)

# four units, two coders, nominal: o11 = 4, o22 = 2, o12 = o21 = 1
KRIPP_UNITS = np.array([[1, 1], [1, 1], [2, 2], [1, 2]], dtype=float)


@pytest.fixture
def hand_matrix():
    return HAND.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)



ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one test per acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    if call.when == "call":
        item.call_report = outcome.get_result()


def pytest_runtest_logreport(report):
    if report.when == "teardown":
        ACCEPTANCE_LINES.extend(v for k, v in report.user_properties if k == "acceptance")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

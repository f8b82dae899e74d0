"""Shared fixtures, and the per-criterion PASS/FAIL summary for the acceptance tests."""

import collections

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fpsolve import make_family

settings.register_profile("fpsolve", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fpsolve")

_CRITERIA = collections.OrderedDict()
_DETAILS = collections.defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    cid = getattr(report, "criterion", None)
    if cid is None:
        return
    ok = _CRITERIA.get(cid, True) and report.passed
    _CRITERIA[cid] = ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_CRITERIA):
        status = "PASS" if _CRITERIA[cid] else "FAIL"
        tr.write_line(f"criterion {cid}: {status}")
        for line in _DETAILS.get(cid, []):
            tr.write_line(f"    {line}")


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion summary of the current test."""
    m = request.node.get_closest_marker("criterion")

    def add(text):
        if m is not None:
            _DETAILS[m.args[0]].append(text)

    return add


@pytest.fixture(scope="session")
def harmonic():
    return make_family("harmonic")


@pytest.fixture(scope="session")
def well():
    return make_family("infinite_well")


@pytest.fixture(scope="session")
def pt1():
    return make_family("poschl_teller")


@pytest.fixture(scope="session")
def pt6():
    return make_family("poschl_teller", lam=6)


@pytest.fixture(scope="session")
def morse():
    return make_family("morse")


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)

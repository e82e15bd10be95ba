import os
import sys

import mpmath
import pytest
from hypothesis import HealthCheck, settings

from plumbed.chardata import product_char
from plumbed.fleet import default_fleet
from plumbed.graph import h_graph, sigma237, single_vertex
from plumbed.lattice import linking_data

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "graphs")


@pytest.fixture(autouse=True)
def _precision():
    with mpmath.workdps(64):
        yield


def H_GRAPH():
    return h_graph((-1, -7), (-2, -3), (-2, -3))


@pytest.fixture(scope="session")
def s237():
    ld = linking_data(sigma237())
    return ld, product_char(ld)


@pytest.fixture(scope="session")
def hgraph():
    ld = linking_data(H_GRAPH())
    return ld, product_char(ld)


@pytest.fixture(scope="session")
def s3():
    ld = linking_data(single_vertex(-1))
    return ld, product_char(ld)


@pytest.fixture(scope="session")
def fleet():
    return default_fleet(60, 1)


@pytest.fixture(scope="session")
def small_fleet(fleet):
    return fleet[:12]


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])

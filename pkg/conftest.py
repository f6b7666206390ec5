"""Shared fixtures: the small named graphs used across the suite."""

import logging

import pytest

from biscount.bigraph import complete_bipartite, cycle, disjoint_union
from biscount.logging_setup import ROOT_LOGGER


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def k11():
    return complete_bipartite(1)


@pytest.fixture
def k22():
    return complete_bipartite(2)


@pytest.fixture
def k33():
    return complete_bipartite(3)


@pytest.fixture
def c6():
    return cycle(3)


@pytest.fixture
def two_k22():
    return disjoint_union(complete_bipartite(2), complete_bipartite(2))


@pytest.fixture
def two_k44():
    return disjoint_union(complete_bipartite(4), complete_bipartite(4))


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    # BISCOUNT_* settings from the shell must not leak into the tests
    monkeypatch.chdir(tmp_path)
    for var in (
        "BISCOUNT_EPSILON",
        "BISCOUNT_SEED",
        "BISCOUNT_C_CONST",
        "BISCOUNT_NET_BUDGET",
        "BISCOUNT_FAMILY_BUDGET",
        "BISCOUNT_SAMPLE_BUDGET",
        "BISCOUNT_BRUTE_FORCE_THRESHOLD",
        "BISCOUNT_WORKERS",
        "BISCOUNT_PROFILE_PATH",
        "BISCOUNT_LOG_LEVEL",
    ):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture(autouse=True)
def _reset_package_logger():
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)
    logger.propagate = True

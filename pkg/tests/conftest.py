"""Shared fixtures: each full-horizon benchmark run happens once per session."""

import pytest

from speccl.acceptance import ScenarioCache


@pytest.fixture(scope="session")
def cache():
    return ScenarioCache()


@pytest.fixture(scope="session")
def fo_sufficient_log(cache):
    return cache.get("fo_sufficient")


@pytest.fixture(scope="session")
def fo_insufficient_log(cache):
    return cache.get("fo_insufficient")


@pytest.fixture(scope="session")
def bs_lyapunov_log(cache):
    return cache.get("bs_lyapunov")


@pytest.fixture(scope="session")
def bs_composite_log(cache):
    return cache.get("bs_composite")

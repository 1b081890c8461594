import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_matrix(rng, m):
    return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))


def random_hermitian(rng, m):
    a = random_matrix(rng, m)
    return a + a.conj().T


def random_psd(rng, m, rank=None):
    g = rng.standard_normal((m, rank or m)) + 1j * rng.standard_normal((m, rank or m))
    return g @ g.conj().T


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])

import warnings

import numpy as np
import pytest

from projoc import Grid, ProblemSpec
from projoc.analytic import cached_reference
from projoc.solvers import RelaxationWarning

# criterion lines collected by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_alpha_one():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RelaxationWarning)
        yield


@pytest.fixture(scope="session")
def benchmark():
    """Returns to the start position and comes to rest: (s0, sf, v0, vf) = (0, 0, 1, 0)."""
    return ProblemSpec(0.0, 0.0, 1.0, 0.0, 2.5)


@pytest.fixture(scope="session")
def grid2000():
    return Grid(2000)


@pytest.fixture(scope="session")
def reference(benchmark, tmp_path_factory):
    """Oracle solution at N = 10^6, tol = 10^-12."""
    cache = tmp_path_factory.mktemp("reference")
    return cached_reference(benchmark, 1_000_000, 1e-12, cache_dir=cache)


@pytest.fixture
def rng():
    return np.random.default_rng(20180304)

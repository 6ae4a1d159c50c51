"""Shared fixtures.  The ex4 adaptive run is expensive and session-scoped;
it is reused by the adaptivity tests and the acceptance suite."""

import numpy as np
import pytest

from ndfem.adapt import AdaptConfig, adapt_loop
from ndfem.assembly import SolverConfig
from ndfem.problems import case


@pytest.fixture(scope="session")
def ex4_adaptive_rounds():
    cfg = AdaptConfig(theta=0.4, max_dofs=100000, solver=SolverConfig(degree=1))
    return adapt_loop(case("ex4"), cfg)


def loglog_slope(x, y):
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])

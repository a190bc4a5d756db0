import math

import numpy as np
import pytest
from hypothesis import settings

from condgrad import BoxIndicator, Problem, Quadratic

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def box1d():
    """f = x^2 / 2 over [-1, 1]."""
    return Problem(Quadratic([[1.0]], [0.0]), BoxIndicator([-1.0], [1.0]))


def rel_close(a, b, rtol=1e-12):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


E2 = math.exp(-2.0)


def rng(seed=0):
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_dyadic(rng, size, max_num=50, max_log2den=6):
    """List of Fractions with power-of-two denominators."""
    from fractions import Fraction
    nums = rng.integers(-max_num, max_num + 1, size=size)
    dens = rng.integers(0, max_log2den + 1, size=size)
    return [Fraction(int(a), 1 << int(d)) for a, d in zip(nums, dens)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])

import sys
from pathlib import Path

import numpy as np
import pytest

from twosphere.geometry import config_from_delta
from twosphere.sequences import build_sequence

sys.path.insert(0, str(Path(__file__).parent))

_CACHE = {}


def cached_sequence(delta, tol=1e-12):
    key = (delta, tol)
    if key not in _CACHE:
        _CACHE[key] = build_sequence(delta, tol)
    return _CACHE[key]


@pytest.fixture(params=[1e-2, 1e-3, 1e-4], ids=lambda d: f"delta={d:g}")
def setup(request):
    delta = request.param
    return config_from_delta(delta), cached_sequence(delta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_exterior_points(config, rng, n, box=3.0):
    """Uniform points in a box around the pair, kept outside both balls with a margin."""
    out = []
    while len(out) < n:
        x = rng.uniform(-box, box, size=3)
        d1 = np.linalg.norm(x - config.c1)
        d2 = np.linalg.norm(x - config.c2)
        if min(d1, d2) > 1.05:
            out.append(x)
    return np.array(out)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_log.RESULTS):
        terminalreporter.write_line(acceptance_log.RESULTS[k])

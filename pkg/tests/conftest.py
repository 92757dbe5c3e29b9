import os

import numpy as np
import pytest

from mcidtest import _pycore

try:
    from mcidtest import _core
except ImportError:  # extension not built
    _core = None

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "src", "mcidtest", "data")

BLOCK = np.array([
    [0.49, 0.49, 0.01, 0.01],
    [0.49, 0.49, 0.01, 0.01],
    [0.01, 0.01, 0.49, 0.49],
    [0.01, 0.01, 0.49, 0.49],
])
TIGHT_BLOCK = np.array([
    [0.4999, 0.4999, 0.0001, 0.0001],
    [0.4999, 0.4999, 0.0001, 0.0001],
    [0.0001, 0.0001, 0.4999, 0.4999],
    [0.0001, 0.0001, 0.4999, 0.4999],
])
UNIFORM4 = np.full((4, 4), 0.25)


def data_path(name):
    return os.path.join(DATA, name)


@pytest.fixture(params=["compiled", "python"])
def backend(request):
    if request.param == "compiled":
        if _core is None:
            pytest.skip("compiled extension not built")
        return _core
    return _pycore


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])

import numpy as np
import pytest

from risbackhaul.numerics import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section('acceptance criteria')
        for k in sorted(REPORT):
            terminalreporter.write_line(REPORT[k])

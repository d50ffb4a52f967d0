import numpy as np
import pytest

from seqweight import _backend


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=["compiled", "python"])
def kernels(request):
    if request.param == "compiled":
        if _backend.BACKEND != "cython":
            pytest.skip("compiled kernels not built")
        return _backend.kernels
    return _backend.fallback


# one line per acceptance criterion, shown after the run whatever the capture mode
CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

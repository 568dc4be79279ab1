import numpy as np
import pytest
from hypothesis import settings

# numba compiles on first use; the first example of a property would blow a deadline
settings.register_profile("trapga", deadline=None, max_examples=60)
settings.load_profile("trapga")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def acceptance(request):
    """Record ``(number, passed, detail)`` for the end-of-session summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    def report(number, passed, detail):
        lines[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}"
        return passed

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])

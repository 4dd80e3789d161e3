import numpy as np
import pytest

_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record ``(number, passed, detail)`` for the end-of-run acceptance table."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number, name, passed, detail=""):
        store[number] = (name, bool(passed), detail)
        return passed
    return record


def pytest_configure(config):
    np.seterr(over="raise", invalid="raise", divide="raise", under="ignore")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        name, passed, detail = store[number]
        terminalreporter.write_line(
            f"criterion {number} {name}: {'PASS' if passed else 'FAIL'}  {detail}")

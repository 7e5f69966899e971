import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, msg = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {msg}")


@pytest.fixture
def criterion(request):
    """Record one acceptance outcome: ``criterion(n, ok, message)``, then assert it."""

    def record(n: int, ok: bool, message: str):
        request.config.stash[_RESULTS][n] = (bool(ok), message)
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {message}")
        assert ok, message

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

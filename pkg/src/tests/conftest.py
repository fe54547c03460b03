import numpy as np
import pytest

from tichain.core.config import env
from tests.metrics_spy import metrics_spy  # noqa: F401


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture(autouse=True, scope="session")
def _single_threaded_defaults():
    monkeypatch = pytest.MonkeyPatch()
    monkeypatch.setenv("THREADS", "1")
    monkeypatch.setenv("METRICS_FILE", "")
    env.THREADS = 1
    env.METRICS_FILE = None
    yield
    monkeypatch.undo()

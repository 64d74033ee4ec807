import socket
from pathlib import Path

import pytest

from cryptohalal import corpus, learners

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def market_fixture_dir() -> Path:
    return FIXTURES / "market"


@pytest.fixture(scope="session")
def html_fixture_dir() -> Path:
    return FIXTURES / "html"


@pytest.fixture(scope="session")
def fixture_dataset():
    return corpus.synthesize_fixture(56, 50, 42)


@pytest.fixture(scope="session")
def svm_model(fixture_dataset):
    return learners.train_svm(fixture_dataset)


@pytest.fixture
def no_network(monkeypatch):
    """Fail the test if anything opens a real network connection."""

    def guard(*args, **kwargs):
        raise AssertionError("test attempted network I/O")

    monkeypatch.setattr(socket.socket, "connect", guard)
    monkeypatch.setattr(socket, "create_connection", guard)

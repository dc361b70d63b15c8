from __future__ import annotations

import json
from pathlib import Path

import pytest

from insightloop.errors import ProviderError
from insightloop.provider import MockProvider
from insightloop.spec import parse_spec
from insightloop.superstore import function_registry
from insightloop.tabular import load_csv

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


class FailingProvider:
    """A provider whose transport is down."""

    def complete(self, prompt, *, max_tokens=1024, timeout_ms=30_000):
        raise ProviderError("provider unreachable")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden() -> dict:
    return json.loads((FIXTURES / "golden" / "insights" / "golden.json").read_text())


@pytest.fixture(scope="session")
def superstore_spec():
    return parse_spec((FIXTURES / "superstore.vaspec.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def superstore_table():
    return load_csv(FIXTURES / "superstore.csv")


@pytest.fixture(scope="session")
def registry():
    return function_registry()


@pytest.fixture()
def mock_provider():
    return MockProvider()


@pytest.fixture()
def failing_provider():
    return FailingProvider()

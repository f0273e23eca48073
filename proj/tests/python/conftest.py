import os
from pathlib import Path

import pytest


@pytest.fixture
def fixtures():
    return Path(os.environ.get("SQUERY_FIXTURES", Path(__file__).resolve().parent.parent / "fixtures"))


@pytest.fixture
def cli():
    path = os.environ.get("SQUERY_CLI")
    if not path:
        pytest.skip("SQUERY_CLI is not set")
    return path

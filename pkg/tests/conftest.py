import json
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ORACLES = Path(__file__).parent / "oracles" / "frozen.json"


@pytest.fixture(scope="session")
def oracle():
    """High-precision reference values computed independently of the package."""
    return json.loads(ORACLES.read_text())


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)

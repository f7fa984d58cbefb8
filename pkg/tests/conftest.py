import os

import pytest

# CPSFX_SEED pins every randomized suite for reproduction.
SEED = int(os.environ.get("CPSFX_SEED", "20260809"))


@pytest.fixture
def seed() -> int:
    return SEED

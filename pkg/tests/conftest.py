import numpy as np
import pytest


@pytest.fixture()
def rng():
    # fresh deterministic stream per test: results never depend on test order
    return np.random.default_rng(20260809)

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dpnilm.model import AppliancePowerVector


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def small_fleet():
    return AppliancePowerVector([3.0, 2.0, 1.0])


@pytest.fixture
def tight_fleet():
    """Eight appliances with comparable powers: concentration holds at delta=2."""
    return AppliancePowerVector(np.linspace(96.0, 110.0, 8))

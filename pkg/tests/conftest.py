import numpy as np
import pytest

from liemorph import GridSpec


@pytest.fixture
def grid64():
    """Desk-scale square grid."""
    return GridSpec(64, 64, 5000.0, 5000.0)


@pytest.fixture
def grid_small():
    """Small rectangular grid; asymmetric on purpose to catch axis mixups."""
    return GridSpec(16, 12, 3.0, 2.0)


@pytest.fixture
def grid16():
    """Unit-square 16x16 grid for dense-oracle comparisons."""
    return GridSpec(16, 16, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)

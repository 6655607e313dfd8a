import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "../src"))

import numpy as np
import pytest

import util

@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

@pytest.fixture
def restore_config():
    yield
    util.load_config()

def random_bloch(rng, n, pure_fraction=0.3):
    """n random states, roughly uniform in the ball, a share of them pure."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    radii = rng.uniform(0, 1, size=n) ** (1 / 3)
    radii[rng.uniform(size=n) < pure_fraction] = 1.0
    return v * radii[:, None]

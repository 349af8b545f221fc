import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def d1():
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    return pts, np.array([0, 0, 1, 1])


def blobs(rng, centers, n_per, scale):
    centers = np.asarray(centers, dtype=float)
    pts = np.concatenate([c + rng.normal(scale=scale, size=(n_per, 2)) for c in centers])
    return pts, np.repeat(np.arange(len(centers)), n_per)

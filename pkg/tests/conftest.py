import numpy as np
import pytest

from rceprecoding import NoiseModel, build_constellation, draw_channel


@pytest.fixture
def qam16():
    return build_constellation(16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def small_instance():
    """(H, noise) with N=8 antennas, M=2 users."""
    return draw_channel(2, 8, 11), NoiseModel.identity(2)

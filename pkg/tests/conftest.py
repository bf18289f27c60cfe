import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def direct_dft(h):
    """O(M^2) DFT by explicit summation over n."""
    h = np.asarray(h, dtype=float)
    M = h.shape[0]
    n = np.arange(M)
    return np.array([np.sum(h * np.exp(-2j * np.pi * k * n / M)) for k in range(M)])

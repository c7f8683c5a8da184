import numpy as np
import pytest

from epkdv.params_grid import Grid, preset


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["cold", "warm"])
def params(request):
    return preset(request.param)


@pytest.fixture
def grid():
    return Grid(128, 40.0)


def smooth_field(grid, rng, modes=6, amp=1.0):
    """Random band-limited field with exponentially decaying modes."""
    x = grid.x
    out = np.zeros(grid.n_points)
    for m in range(1, modes + 1):
        kx = 2 * np.pi * m / grid.length_L
        a, b = rng.normal(size=2) * amp * np.exp(-0.5 * m)
        out += a * np.cos(kx * x) + b * np.sin(kx * x)
    return out

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epkdv.errors import IntegrabilityError, PreconditionError
from epkdv.params_grid import Grid, GridField
from epkdv.spectral_ops import antideriv_zero_mean, dealias, deriv, sobolev_norm

from conftest import smooth_field


def _dft_deriv(values, L, order):
    """Derivative through an explicit O(N^2) Fourier sum, independent of the FFT path."""
    N = len(values)
    j = np.arange(N)
    m = np.fft.fftfreq(N, 1.0 / N)
    W = np.exp(-2j * np.pi * np.outer(m, j) / N)
    c = W @ values / N
    kk = 2 * np.pi * m / L
    if N % 2 == 0:
        c[N // 2] = c[N // 2] if order % 2 == 0 else 0.0
    return np.real(np.conj(W).T @ ((1j * kk) ** order * c))


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_single_mode_derivative(order):
    g = Grid(64, 10.0)
    q = 2 * np.pi / g.length_L
    f = GridField(np.sin(q * g.x), g)
    exact = {1: q * np.cos(q * g.x), 2: -q**2 * np.sin(q * g.x),
             3: -q**3 * np.cos(q * g.x), 4: q**4 * np.sin(q * g.x)}[order]
    # round-off in the unused modes is amplified by k_max**order
    tol = max(1e-12, 1e-15 * np.max(np.abs(g.k)) ** order)
    assert np.max(np.abs(deriv(f, order).values - exact)) < tol


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_constant_has_zero_derivative(order):
    g = Grid(32, 5.0)
    assert np.max(np.abs(deriv(GridField(np.full(32, 3.7), g), order).values)) < 1e-13


def test_sech2_derivative_matches_centered_differences():
    errs = []
    for N in (256, 512):
        g = Grid(N, 40.0)
        f = 1.0 / np.cosh(g.x / 2) ** 2
        h = g.spacing
        fd = (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)
        errs.append(np.max(np.abs(deriv(GridField(f, g)).values - fd)))
    # centred differences are second order, so halving the spacing quarters the gap
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


def test_bad_order_rejected(grid):
    with pytest.raises(PreconditionError):
        deriv(grid.zeros(), 5)


def test_antiderivative_of_cosine():
    g = Grid(64, 12.0)
    q = 2 * np.pi / g.length_L
    F = antideriv_zero_mean(GridField(np.cos(q * g.x), g))
    assert np.max(np.abs(F.values - np.sin(q * g.x) / q)) < 1e-12


def test_antiderivative_inverse_pair(grid, rng):
    f = GridField(smooth_field(grid, rng), grid)
    F = antideriv_zero_mean(f)
    assert np.max(np.abs(deriv(F).values - f.values)) < 1e-12
    assert abs(np.mean(F.values)) < 1e-13


def test_antiderivative_rejects_nonzero_mean(grid):
    with pytest.raises(IntegrabilityError):
        antideriv_zero_mean(GridField(np.ones(grid.n_points), grid))


def test_linearity(grid, rng):
    a, b = smooth_field(grid, rng), smooth_field(grid, rng)
    fa, fb = GridField(a, grid), GridField(b, grid)
    lhs = deriv(GridField(2 * a - 3 * b, grid), 3).values
    assert np.allclose(lhs, 2 * deriv(fa, 3).values - 3 * deriv(fb, 3).values, atol=1e-12)
    lhs = antideriv_zero_mean(GridField(2 * a - 3 * b, grid)).values
    rhs = 2 * antideriv_zero_mean(fa).values - 3 * antideriv_zero_mean(fb).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_sobolev_norm_of_sine():
    g = Grid(64, 2 * np.pi)
    f = GridField(np.sin(g.x), g)
    assert sobolev_norm(f, 0) == pytest.approx(np.sqrt(np.pi), rel=1e-13)
    assert sobolev_norm(f, 1) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), s=st.integers(0, 4))
def test_sobolev_norm_matches_direct_sum(seed, s):
    g = Grid(96, 30.0)
    f = smooth_field(g, np.random.default_rng(seed), modes=20)
    direct = sum(g.spacing * np.sum(_dft_deriv(f, g.length_L, j) ** 2) if j else g.spacing * np.sum(f**2)
                 for j in range(s + 1))
    assert sobolev_norm(GridField(f, g), s) == pytest.approx(np.sqrt(direct), rel=1e-12)


def test_parseval_consistency(grid, rng):
    f = smooth_field(grid, rng, modes=30)
    assert sobolev_norm(GridField(f, grid), 0) ** 2 == pytest.approx(grid.spacing * np.sum(f**2), rel=1e-12)


def test_dealias_keeps_low_modes_and_kills_top():
    g = Grid(48, 6.0)
    low = np.cos(2 * np.pi * 3 * g.x / g.length_L)
    assert np.allclose(dealias(GridField(low, g)).values, low, atol=1e-14)
    top = np.cos(np.pi * np.arange(48))  # Nyquist mode
    assert np.max(np.abs(dealias(GridField(top, g)).values)) < 1e-14


def test_dealias_idempotent(grid, rng):
    f = GridField(rng.normal(size=grid.n_points), grid)
    once = dealias(f)
    assert np.max(np.abs(dealias(once).values - once.values)) < 1e-15 * np.max(np.abs(once.values)) * 8

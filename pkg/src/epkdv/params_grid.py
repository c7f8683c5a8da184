"""Physical constants, parameter presets and the periodic grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.lib.mixins import NDArrayOperatorsMixin

from .errors import NumericError, ParameterError, ShapeError

__all__ = [
    "PhysParams",
    "make_params",
    "PRESETS",
    "preset",
    "acoustic_matrix",
    "acoustic_determinant",
    "Grid",
    "GridField",
]


@dataclass(frozen=True)
class PhysParams:
    """Constants of the scaled Euler-Poisson system.

    Derived quantities are filled in at construction:

    * ``V``     -- acoustic speed, ``V**2 == (T_i + T_e) / M``
    * ``kappa`` -- ``e / T_e``, the Boltzmann exponent per unit potential
    * ``delta`` -- KdV dispersion coefficient ``T_e**2 / (8 pi n_bar e**2 M V)``

    The dispersion coefficient is the one produced by the order-by-order
    cancellation in the residual engine (see ``hierarchy``). It equals
    ``(1/2) * lambda_D**2 * T_e / (M V)`` with ``lambda_D**2 = T_e/(4 pi n_bar e**2)``.
    """

    e_charge: float
    mass_M: float
    T_i: float
    T_e: float
    n_bar: float
    V: float = field(init=False)
    kappa: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        for name in ("e_charge", "mass_M", "T_e", "n_bar"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ParameterError(f"{name} must be positive and finite, got {val!r}")
        if not (math.isfinite(self.T_i) and self.T_i >= 0):
            raise ParameterError(f"T_i must be >= 0 and finite, got {self.T_i!r}")
        V = math.sqrt((self.T_i + self.T_e) / self.mass_M)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "kappa", self.e_charge / self.T_e)
        object.__setattr__(self, "delta", self.T_e * self.debye_sq / (2.0 * self.mass_M * V))

    @property
    def poisson_scale(self) -> float:
        """``4 pi e n_bar``, the factor in front of the Boltzmann bracket."""
        return 4.0 * math.pi * self.e_charge * self.n_bar

    @property
    def debye_sq(self) -> float:
        return self.T_e / (4.0 * math.pi * self.n_bar * self.e_charge**2)

    @property
    def poisson_coupling(self) -> float:
        """Weight ``T_e / (4 pi e n_bar M)`` of the differentiated Poisson residual."""
        return self.T_e / (self.poisson_scale * self.mass_M)

    @property
    def reference_delta(self) -> float:
        """Alternative coefficient ``T_e / (8 pi n_bar e M V)``; equals ``delta`` iff T_e == e."""
        return self.T_e / (8.0 * math.pi * self.n_bar * self.e_charge * self.mass_M * self.V)


def make_params(e, M, T_i, T_e, n_bar) -> PhysParams:
    return PhysParams(float(e), float(M), float(T_i), float(T_e), float(n_bar))


PRESETS = {
    "warm": make_params(1.0, 1.0, 1.0, 1.0, 1.0 / (4.0 * math.pi)),
    "cold": make_params(1.0, 1.0, 0.0, 1.0, 1.0 / (4.0 * math.pi)),
}


def preset(name: str) -> PhysParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def acoustic_matrix(V_trial: float, params: PhysParams) -> np.ndarray:
    """Coefficient matrix of the order-epsilon system acting on (n1, u1, phi1)."""
    p = params
    return np.array(
        [
            [V_trial, -1.0, 0.0],
            [p.T_i / p.mass_M, -V_trial, p.e_charge / p.mass_M],
            [1.0, 0.0, -p.kappa],
        ]
    )


def acoustic_determinant(V_trial: float, params: PhysParams) -> float:
    # cofactor expansion along the first row, written out so that the
    # cancellation at V_trial = params.V is as clean as floating point allows
    a = acoustic_matrix(V_trial, params)
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[x_min, x_min + length_L)``.

    Spectral kernels operate along the last axis of any array whose trailing
    dimension is ``n_points``; leading axes (time, jet order, series order)
    are carried along untouched.
    """

    n_points: int
    length_L: float
    x_min: float | None = None

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise ParameterError(f"n_points must be an integer >= 8, got {self.n_points!r}")
        if self.n_points % 2:
            raise ParameterError("n_points must be even")
        if not (math.isfinite(self.length_L) and self.length_L > 0):
            raise ParameterError(f"length_L must be positive, got {self.length_L!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "length_L", float(self.length_L))
        if self.x_min is None:
            object.__setattr__(self, "x_min", -0.5 * self.length_L)

    @property
    def spacing(self) -> float:
        return self.length_L / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.spacing * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Non-negative rfft wavenumbers ``2 pi m / L``, m = 0..N/2."""
        k = 2.0 * np.pi * np.fft.rfftfreq(self.n_points, d=self.spacing)
        k.setflags(write=False)
        return k

    @cached_property
    def k_eff(self) -> np.ndarray:
        """Wavenumbers used by derivatives: the Nyquist mode is treated as 0.

        Zeroing the unpaired Nyquist mode keeps every derivative of a real
        field real and makes ``deriv(deriv(f, 1), 1) == deriv(f, 2)`` exact.
        """
        k = self.k.copy()
        k[-1] = 0.0
        k.setflags(write=False)
        return k

    @cached_property
    def keep_mask(self) -> np.ndarray:
        m = np.arange(self.n_points // 2 + 1)
        # 2/3 rule: modes above N/3 are removed
        mask = (m <= self.n_points // 3).astype(float)
        mask.setflags(write=False)
        return mask

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        w = np.full(self.n_points // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w * self.length_L / self.n_points**2

    # --- raw-array kernels (last axis) ---------------------------------
    def fft(self, v):
        return np.fft.rfft(v, axis=-1)

    def ifft(self, vh):
        return np.fft.irfft(vh, n=self.n_points, axis=-1)

    def deriv_values(self, v, order=1):
        if order == 0:
            return np.array(v, dtype=float)
        return self.ifft((1j * self.k_eff) ** order * self.fft(v))

    def dealias_values(self, v):
        return self.ifft(self.keep_mask * self.fft(v))

    def antideriv_values(self, v):
        vh = self.fft(v)
        out = np.zeros_like(vh)
        nz = self.k_eff != 0
        out[..., nz] = vh[..., nz] / (1j * self.k_eff[nz])
        return self.ifft(out)

    def mean_values(self, v):
        return np.mean(v, axis=-1)

    def l2_sq_values(self, v, order=0):
        """``||d^order v||^2`` by Parseval on the rfft spectrum."""
        vh = self.fft(v)
        kk = self.k_eff ** (2 * order) if order else 1.0
        return np.sum(self.parseval_weights * kk * np.abs(vh) ** 2, axis=-1)

    def field(self, values) -> "GridField":
        return GridField(values, self)

    def zeros(self) -> "GridField":
        return GridField(np.zeros(self.n_points), self)


class GridField(NDArrayOperatorsMixin):
    """Read-only real samples on a :class:`Grid`.

    Supports numpy arithmetic (results stay GridFields on the same grid) and
    refuses non-finite data.
    """

    __slots__ = ("values", "grid")
    __array_priority__ = 20

    def __init__(self, values, grid: Grid):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != grid.n_points:
            raise ShapeError(f"expected {grid.n_points} samples, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NumericError("GridField values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "grid", grid)

    def __setattr__(self, name, value):
        raise AttributeError("GridField is immutable")

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        grid = self.grid
        args = []
        for x in inputs:
            if isinstance(x, GridField):
                if x.grid != grid:
                    raise ShapeError("GridFields live on different grids")
                args.append(x.values)
            else:
                args.append(x)
        result = getattr(ufunc, method)(*args, **kwargs)
        if isinstance(result, np.ndarray) and result.shape == (grid.n_points,):
            return GridField(result, grid)
        return result

    def __len__(self):
        return self.grid.n_points

    def __getitem__(self, idx):
        return self.values[idx]

    def __repr__(self):
        return f"GridField(n={self.grid.n_points}, max|f|={np.max(np.abs(self.values)):.3g})"

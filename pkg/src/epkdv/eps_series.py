"""Truncated power series in epsilon and the residual engine for the scaled system.

Coefficients are either plain grid samples (shape ``(N,)``) or time-Taylor
jets (shape ``(J+1, N)``, row ``m`` holding ``d^m/dt^m f / m!``).  Jets let
the hierarchy obtain exact time derivatives of derived quantities without
differencing in time: a product of jets is a Cauchy product along the jet
axis, and ``d/dt`` is an index shift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import HierarchyError, PreconditionError, ShapeError
from .params_grid import Grid, GridField, PhysParams

__all__ = [
    "EpsSeries",
    "series_mul",
    "series_exp",
    "series_inv1p",
    "ProfileSlice",
    "ResidualSeries",
    "ep_residual_series",
    "jet_mul",
    "jet_dt",
]


def jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise product of two fields; Cauchy product if they are jets."""
    if a.ndim == 1:
        return a * b
    J = a.shape[0]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    live_a = [p for p in range(J) if a[p].any()]
    live_b = [q for q in range(J) if b[q].any()]
    for p in live_a:
        for q in live_b:
            if p + q < J:
                out[p + q] += a[p] * b[q]
    return out


def jet_dt(a: np.ndarray) -> np.ndarray:
    """Time derivative of a jet; the top row becomes unknown and is set to 0."""
    out = np.zeros_like(a)
    m = np.arange(1, a.shape[0])[:, None]
    out[:-1] = m * a[1:]
    return out


class EpsSeries:
    """``sum_{k=0}^{K} eps^k c_k`` with coefficients stacked in ``coeffs[k]``."""

    __slots__ = ("coeffs", "grid")

    def __init__(self, coeffs, grid: Grid):
        arr = np.array(coeffs, dtype=float)
        if arr.ndim < 2 or arr.shape[-1] != grid.n_points:
            raise ShapeError(f"coefficients must end in a grid axis of {grid.n_points}, got {arr.shape}")
        self.coeffs = arr
        self.grid = grid

    # construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, K: int, grid: Grid, field_shape=None) -> "EpsSeries":
        fs = (grid.n_points,) if field_shape is None else tuple(field_shape)
        return cls(np.zeros((K + 1,) + fs), grid)

    @classmethod
    def one(cls, K: int, grid: Grid, field_shape=None) -> "EpsSeries":
        s = cls.zeros(K, grid, field_shape)
        if s.coeffs.ndim == 2:
            s.coeffs[0] = 1.0
        else:
            s.coeffs[0, 0] = 1.0
        return s

    @classmethod
    def from_fields(cls, fields: Sequence, grid: Grid, K: int | None = None, start: int = 0) -> "EpsSeries":
        """Series whose coefficient ``start + i`` is ``fields[i]``."""
        arrs = [np.asarray(f, dtype=float) for f in fields]
        K = start + len(arrs) - 1 if K is None else K
        fs = arrs[0].shape if arrs else (grid.n_points,)
        s = cls.zeros(K, grid, fs)
        for i, a in enumerate(arrs):
            if start + i <= K:
                s.coeffs[start + i] = a
        return s

    # shape helpers ----------------------------------------------------------
    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    trunc_order = order

    @property
    def field_shape(self):
        return self.coeffs.shape[1:]

    def coeff(self, k: int):
        c = self.coeffs[k]
        return GridField(c, self.grid) if c.ndim == 1 else c.copy()

    def _check(self, other: "EpsSeries"):
        if not isinstance(other, EpsSeries):
            raise ShapeError(f"expected EpsSeries, got {type(other).__name__}")
        if other.grid != self.grid:
            raise ShapeError("series live on different grids")
        if other.coeffs.shape != self.coeffs.shape:
            raise ShapeError(f"series shapes differ: {self.coeffs.shape} vs {other.coeffs.shape}")

    # algebra ------------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, EpsSeries):
            self._check(other)
            return EpsSeries(self.coeffs + other.coeffs, self.grid)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, EpsSeries):
            self._check(other)
            return EpsSeries(self.coeffs - other.coeffs, self.grid)
        return NotImplemented

    def __neg__(self):
        return EpsSeries(-self.coeffs, self.grid)

    def __mul__(self, other):
        if isinstance(other, EpsSeries):
            return series_mul(self, other)
        if np.isscalar(other):
            return EpsSeries(other * self.coeffs, self.grid)
        return NotImplemented

    __rmul__ = __mul__

    def dx(self, order: int = 1) -> "EpsSeries":
        return EpsSeries(self.grid.deriv_values(self.coeffs, order), self.grid)

    def shift(self, m: int = 1) -> "EpsSeries":
        """Multiply by ``eps**m`` and truncate at the same order."""
        out = np.zeros_like(self.coeffs)
        if m <= self.order:
            out[m:] = self.coeffs[: self.order + 1 - m]
        return EpsSeries(out, self.grid)

    def evaluate(self, eps: float) -> np.ndarray:
        """Horner evaluation of the truncated series at a numeric eps."""
        acc = np.zeros(self.field_shape)
        for c in self.coeffs[::-1]:
            acc = acc * eps + c
        return acc

    def __repr__(self):
        return f"EpsSeries(K={self.order}, field_shape={self.field_shape})"


def _live(s: EpsSeries) -> np.ndarray:
    return np.array([c.any() for c in s.coeffs])


def series_mul(a: EpsSeries, b: EpsSeries, dealias: bool = True) -> EpsSeries:
    """Truncated Cauchy product; each output coefficient is dealiased once."""
    a._check(b)
    K = a.order
    la, lb = _live(a), _live(b)
    out = np.zeros_like(a.coeffs)
    for k in range(K + 1):
        acc = None
        for i in range(k + 1):
            if la[i] and lb[k - i]:
                term = jet_mul(a.coeffs[i], b.coeffs[k - i])
                acc = term if acc is None else acc + term
        if acc is not None:
            out[k] = a.grid.dealias_values(acc) if dealias else acc
    return EpsSeries(out, a.grid)


def _require_zero_leading(a: EpsSeries, what: str):
    if a.coeffs[0].any():
        raise PreconditionError(f"{what} needs a series with identically zero eps^0 coefficient")


def series_exp(a: EpsSeries, dealias: bool = True) -> EpsSeries:
    """exp(a) for ``a_0 == 0`` via ``k E_k = sum_j j a_j E_{k-j}``.

    The ``j = k`` term multiplies ``a_k`` by ``E_0 = 1`` and is added
    without dealiasing so that the linear part of the exponential is exact.
    """
    _require_zero_leading(a, "series_exp")
    K = a.order
    E = EpsSeries.one(K, a.grid, a.field_shape).coeffs
    la = _live(a)
    for k in range(1, K + 1):
        acc = None
        for j in range(1, k):
            if la[j] and E[k - j].any():
                term = j * jet_mul(a.coeffs[j], E[k - j])
                acc = term if acc is None else acc + term
        nonlin = 0.0 if acc is None else (a.grid.dealias_values(acc) if dealias else acc)
        E[k] = a.coeffs[k] + nonlin / k
    return EpsSeries(E, a.grid)


def series_inv1p(a: EpsSeries, dealias: bool = True) -> EpsSeries:
    """``1/(1 + a) - 1`` for ``a_0 == 0`` (the part beyond the constant 1)."""
    _require_zero_leading(a, "series_inv1p")
    K = a.order
    R = np.zeros_like(a.coeffs)
    la = _live(a)
    for k in range(1, K + 1):
        acc = None
        for j in range(1, k):
            if la[j] and R[k - j].any():
                term = jet_mul(a.coeffs[j], R[k - j])
                acc = term if acc is None else acc + term
        nonlin = 0.0 if acc is None else (a.grid.dealias_values(acc) if dealias else acc)
        R[k] = -a.coeffs[k] - nonlin
    return EpsSeries(R, a.grid)


@dataclass(frozen=True)
class ProfileSlice:
    """Profiles ``(n^(k), u^(k), phi^(k))``, k = 1..m, at one instant.

    Entries are arrays of shape ``(N,)`` or jets ``(J+1, N)``.
    """

    n: tuple
    u: tuple
    phi: tuple
    grid: Grid

    def __post_init__(self):
        if not (len(self.n) == len(self.u) == len(self.phi)):
            raise ShapeError("n, u, phi must list the same number of profiles")
        conv = lambda seq: tuple(np.asarray(f, dtype=float) for f in seq)
        object.__setattr__(self, "n", conv(self.n))
        object.__setattr__(self, "u", conv(self.u))
        object.__setattr__(self, "phi", conv(self.phi))
        shapes = {f.shape for f in self.n + self.u + self.phi}
        if len(shapes) > 1:
            raise ShapeError(f"inconsistent profile shapes {shapes}")
        if shapes and next(iter(shapes))[-1] != self.grid.n_points:
            raise ShapeError("profiles do not match the grid")

    @property
    def depth(self) -> int:
        return len(self.n)

    @property
    def field_shape(self):
        return self.n[0].shape if self.n else (self.grid.n_points,)

    def values(self) -> "ProfileSlice":
        """Drop jet rows, keeping only the instantaneous values."""
        if len(self.field_shape) == 1:
            return self
        pick = lambda seq: tuple(f[0] for f in seq)
        return ProfileSlice(pick(self.n), pick(self.u), pick(self.phi), self.grid)


@dataclass(frozen=True)
class ResidualSeries:
    mass: EpsSeries
    momentum: EpsSeries
    poisson: EpsSeries

    def __iter__(self):
        return iter((self.mass, self.momentum, self.poisson))


DtSupplier = Callable[[str, int], np.ndarray]


def ep_residual_series(
    profiles: ProfileSlice,
    dt_supplier: DtSupplier | None,
    params: PhysParams,
    K: int = 5,
    dealias: bool = True,
) -> ResidualSeries:
    """Residuals of the three scaled equations under the profile ansatz.

    With ``N = 1 + sum eps^k n^(k)`` (density over n_bar) and
    ``u = sum eps^k u^(k)``, ``phi = sum eps^k phi^(k)``:

        mass     = eps d_t N - V dN + d(N u)
        momentum = eps d_t u - V du + u du + (T_i/M) dN/N + (e/M) dphi
        poisson  = eps d^2 phi - 4 pi e n_bar (exp(kappa phi) - N)

    ``dt_supplier(var, k)`` with var in {"n", "u"} returns ``d_t`` of profile
    k; it is consulted only for profiles whose time derivative reaches
    order <= K.
    """
    g = profiles.grid
    fs = profiles.field_shape
    m = profiles.depth
    p = params

    def build(fields):
        s = EpsSeries.zeros(K, g, fs)
        for k, f in enumerate(fields[:K], start=1):
            s.coeffs[k] = f
        return s

    Nt, U, Phi = build(profiles.n), build(profiles.u), build(profiles.phi)
    dtN, dtU = EpsSeries.zeros(K, g, fs), EpsSeries.zeros(K, g, fs)
    for k in range(1, min(m, K - 1) + 1):
        if dt_supplier is None:
            raise HierarchyError(f"time derivative of profile {k} required but no supplier given")
        try:
            dtN.coeffs[k + 1] = dt_supplier("n", k)
            dtU.coeffs[k + 1] = dt_supplier("u", k)
        except (KeyError, IndexError) as exc:
            raise HierarchyError(f"no time derivative available for profile {k}: {exc}") from exc

    mul = lambda a, b: series_mul(a, b, dealias)
    dN, dU = Nt.dx(), U.dx()
    mass = dtN - p.V * dN + dU + mul(Nt, U).dx()
    logder = dN + mul(dN, series_inv1p(Nt, dealias))
    mom = dtU - p.V * dU + mul(U, dU) + (p.T_i / p.mass_M) * logder + (p.e_charge / p.mass_M) * Phi.dx()
    E = series_exp(p.kappa * Phi, dealias) - EpsSeries.one(K, g, fs)
    pois = Phi.dx(2).shift(1) - p.poisson_scale * (E - Nt)
    return ResidualSeries(mass, mom, pois)

"""KdV and linearized inhomogeneous KdV integrators (ETDRK4, Fourier pseudospectral)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import HierarchyError, IntegrationError, PreconditionError, ShapeError
from .params_grid import Grid, GridField, PhysParams

__all__ = [
    "ETDRK4",
    "KdvTrajectory",
    "solve_kdv",
    "solve_linearized_kdv",
    "kdv_time_derivative",
    "kdv_soliton",
    "kdv_invariants",
    "step_schedule",
]


class ETDRK4:
    """Cox-Matthews ETDRK4 for ``v_t = L v + N(t, v)`` with diagonal ``L``.

    The phi-function coefficients are evaluated by averaging over a circle
    of radius 1 around each ``h L`` (Kassam & Trefethen), which avoids the
    cancellation near ``h L = 0``. ``L`` may be complex, so the full circle
    is used rather than its upper half.
    """

    def __init__(self, lin: np.ndarray, h: float, n_contour: int = 32):
        self.h = float(h)
        L = np.asarray(lin, dtype=complex)
        self.E = np.exp(h * L)
        self.E2 = np.exp(h * L / 2)
        r = np.exp(2j * np.pi * (np.arange(n_contour) + 0.5) / n_contour)
        LR = h * L[:, None] + r[None, :]
        eLR = np.exp(LR)
        self.Q = h * np.mean((np.exp(LR / 2) - 1) / LR, axis=1)
        self.f1 = h * np.mean((-4 - LR + eLR * (4 - 3 * LR + LR**2)) / LR**3, axis=1)
        self.f2 = h * np.mean((2 + LR + eLR * (LR - 2)) / LR**3, axis=1)
        self.f3 = h * np.mean((-4 - 3 * LR - LR**2 + eLR * (4 - LR)) / LR**3, axis=1)

    def step(self, v, t, nonlin):
        h = self.h
        Nv = nonlin(t, v)
        a = self.E2 * v + self.Q * Nv
        Na = nonlin(t + h / 2, a)
        b = self.E2 * v + self.Q * Na
        Nb = nonlin(t + h / 2, b)
        c = self.E2 * a + self.Q * (2 * Nb - Nv)
        Nc = nonlin(t + h, c)
        return self.E * v + self.f1 * Nv + 2 * self.f2 * (Na + Nb) + self.f3 * Nc


def step_schedule(tau: float, dt: float, out_every: int) -> tuple[int, float]:
    """Number of steps and the (possibly shortened) step that lands on tau."""
    if not (tau > 0 and dt > 0):
        raise PreconditionError(f"need tau > 0 and dt > 0, got tau={tau}, dt={dt}")
    if out_every < 1:
        raise PreconditionError("out_every must be >= 1")
    n = max(1, math.ceil(tau / dt - 1e-9))
    n = out_every * math.ceil(n / out_every)
    return n, tau / n


@dataclass(frozen=True)
class KdvTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, N)
    params: PhysParams
    grid: Grid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.states.shape != (len(self.times), self.grid.n_points):
            raise ShapeError(f"states shape {self.states.shape} does not match times/grid")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ShapeError("trajectory times must increase")

    def state(self, i: int) -> GridField:
        return GridField(self.states[i], self.grid)

    def at(self, t: float) -> np.ndarray:
        """Cubic-in-time interpolation between stored states."""
        return _time_interpolant(self.times, self.states, self.times[-1], "trajectory")(t)


def _kdv_linear_symbol(grid: Grid, params: PhysParams) -> np.ndarray:
    # -delta d^3 in Fourier space
    return -params.delta * (1j * grid.k_eff) ** 3


def _flux_hat(grid: Grid, prod: np.ndarray) -> np.ndarray:
    """Fourier coefficients of d_x D(prod)."""
    return 1j * grid.k_eff * grid.keep_mask * grid.fft(prod)


def kdv_time_derivative(n: GridField, forcing_or_none, n1_or_none, params: PhysParams) -> GridField:
    """``d_t n`` from the KdV equation (k = 1) or its linearization (k >= 2)."""
    g = n.grid
    v = np.asarray(n, dtype=float)
    if n1_or_none is None:
        if forcing_or_none is not None:
            raise PreconditionError("a forcing requires the first profile as advecting field")
        rhs = -0.5 * params.V * g.ifft(_flux_hat(g, v * v))
    else:
        n1 = np.asarray(n1_or_none, dtype=float)
        rhs = -params.V * g.ifft(_flux_hat(g, n1 * v))
        if forcing_or_none is not None:
            rhs = rhs + np.asarray(forcing_or_none, dtype=float)
    rhs = rhs - params.delta * g.deriv_values(v, 3)
    return GridField(rhs, g)


def kdv_soliton(grid: Grid, params: PhysParams, speed: float = 1.0, center: float = 0.0, t: float = 0.0) -> GridField:
    """Travelling wave ``(3c/V) sech^2(sqrt(c/delta)/2 (x - x0 - c t))`` (periodically wrapped)."""
    if speed <= 0:
        raise PreconditionError("soliton speed must be positive")
    amp = 3.0 * speed / params.V
    beta = 0.5 * math.sqrt(speed / params.delta)
    L = grid.length_L
    xi = np.mod(grid.x - center - speed * t + 0.5 * L, L) - 0.5 * L
    return GridField(amp / np.cosh(beta * xi) ** 2, grid)


def kdv_invariants(n, grid: Grid, params: PhysParams) -> dict:
    """Mass, momentum and Hamiltonian of the KdV flow.

    ``d/dt`` of each vanishes under ``n_t + V n n_x + delta n_xxx = 0``:
    mass and ``int n^2`` directly, and ``int (V n^3/6 - delta n_x^2/2)``
    after two integrations by parts.
    """
    v = np.asarray(n, dtype=float)
    dx = grid.spacing
    nx = grid.deriv_values(v, 1)
    return {
        "mass": float(np.sum(v) * dx),
        "momentum": float(np.sum(v * v) * dx),
        "energy": float(np.sum(params.V * v**3 / 6.0 - 0.5 * params.delta * nx**2) * dx),
    }


def _check_finite(v, t):
    if not np.all(np.isfinite(v)):
        raise IntegrationError(f"non-finite field at t = {t:.6g}")


def _integrate(grid, lin, nonlin, v0, tau, dt, out_every, project=None):
    n_steps, h = step_schedule(tau, dt, out_every)
    stepper = ETDRK4(lin, h)
    vh = grid.fft(v0)
    times = [0.0]
    states = [np.array(v0, dtype=float)]
    for s in range(1, n_steps + 1):
        t_old = (s - 1) * h
        vh = stepper.step(vh, t_old, nonlin)
        if s % out_every == 0:
            v = grid.ifft(vh)
            t = s * h
            _check_finite(v, t)
            times.append(t)
            states.append(v)
    v = grid.ifft(vh)
    _check_finite(v, tau)
    return np.array(times), np.array(states), h


def solve_kdv(n1_0: GridField, tau: float, params: PhysParams, dt: float, out_every: int = 1) -> KdvTrajectory:
    """``n_t + V n n_x + delta n_xxx = 0`` with the flux written as ``(V/2)(n^2)_x``."""
    g = n1_0.grid
    lin = _kdv_linear_symbol(g, params)
    half_V = 0.5 * params.V

    def nonlin(t, vh):
        v = g.ifft(vh)
        return -half_V * _flux_hat(g, v * v)

    times, states, h = _integrate(g, lin, nonlin, n1_0.values, tau, dt, out_every)
    return KdvTrajectory(times, states, params, g, {"dt": h, "k": 1})


def _time_interpolant(times, values, tau, what) -> Callable[[float], np.ndarray]:
    times = np.asarray(times, dtype=float)
    tol = 1e-9 * max(1.0, abs(tau))
    if times[0] > tol or times[-1] < tau - tol:
        raise HierarchyError(
            f"{what} covers [{times[0]:.6g}, {times[-1]:.6g}] but [0, {tau:.6g}] is required"
        )
    if len(times) < 2:
        raise HierarchyError(f"{what} needs at least two samples")
    spline = CubicSpline(times, np.asarray(values, dtype=float), axis=0)
    return lambda t: spline(t)


def _as_time_function(obj, tau, what, grid):
    if obj is None:
        return lambda t: np.zeros(grid.n_points)
    if callable(obj) and not isinstance(obj, KdvTrajectory):
        return lambda t: np.asarray(obj(t), dtype=float)
    if isinstance(obj, KdvTrajectory):
        return _time_interpolant(obj.times, obj.states, tau, what)
    times, values = obj
    return _time_interpolant(times, values, tau, what)


def solve_linearized_kdv(
    k: int,
    nk_0: GridField,
    forcing_supplier,
    n1_traj,
    tau: float,
    params: PhysParams,
    dt: float,
    out_every: int = 1,
) -> KdvTrajectory:
    """``n_t + V (n1 n)_x + delta n_xxx = G`` for profile ``k >= 2``.

    ``forcing_supplier`` and ``n1_traj`` may each be a callable of time, a
    :class:`KdvTrajectory`, or a ``(times, values)`` pair; sampled data are
    interpolated cubically in time at the stage times.
    """
    if k < 2:
        raise PreconditionError("linearized profiles start at k = 2")
    g = nk_0.grid
    G = _as_time_function(forcing_supplier, tau, "forcing", g)
    n1 = _as_time_function(n1_traj, tau, "first profile", g)
    if n1_traj is None:
        raise HierarchyError("the first profile trajectory is required")
    lin = _kdv_linear_symbol(g, params)
    V = params.V

    def nonlin(t, vh):
        v = g.ifft(vh)
        return g.fft(G(t)) - V * _flux_hat(g, n1(t) * v)

    times, states, h = _integrate(g, lin, nonlin, nk_0.values, tau, dt, out_every)
    return KdvTrajectory(times, states, params, g, {"dt": h, "k": k})

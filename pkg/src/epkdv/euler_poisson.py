"""Direct solver for the scaled Euler-Poisson system at finite epsilon.

    eps n_t - V n_x + (n u)_x = 0
    eps u_t - V u_x + u u_x + (T_i/M) n_x / n = -(e/M) phi_x
    eps phi_xx = 4 pi e (n_bar exp(e phi / T_e) - n)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import DomainError, EllipticError, IntegrationError, PreconditionError, ShapeError
from .kdv_solvers import step_schedule
from .params_grid import Grid, GridField, PhysParams

__all__ = [
    "EpState",
    "EpTrajectory",
    "PoissonInfo",
    "poisson_solve",
    "ep_rhs",
    "ep_solve",
    "max_stable_dt",
]

log = logging.getLogger(__name__)

DEFAULT_CFL = 0.25
DEFAULT_MAX_NEWTON = 50


@dataclass(frozen=True)
class EpState:
    n: GridField
    u: GridField
    phi: GridField
    t: float
    eps: float

    @property
    def grid(self) -> Grid:
        return self.n.grid


@dataclass(frozen=True)
class PoissonInfo:
    residuals: tuple  # sup-norm residual before each Newton update and at exit
    cg_iterations: tuple

    @property
    def iterations(self) -> int:
        return len(self.residuals) - 1


def _poisson_residual(phi, N, eps, params, grid):
    return eps * grid.deriv_values(phi, 2) - params.poisson_scale * (np.exp(params.kappa * phi) - N)


def _newton(N, eps, params, grid, phi, tol, max_newton):
    S, kappa = params.poisson_scale, params.kappa
    k2 = grid.k_eff**2
    res = _poisson_residual(phi, N, eps, params, grid)
    history, cg_its = [float(np.max(np.abs(res)))], []
    while history[-1] > tol:
        if len(history) > max_newton:
            raise EllipticError(f"Newton stalled at residual {history[-1]:.3e} after {max_newton} iterations")
        a = S * kappa * np.exp(kappa * phi)
        abar = float(np.mean(a))
        # -J = -eps d^2 + a is symmetric positive definite
        op = LinearOperator((grid.n_points,) * 2, matvec=lambda v: -eps * grid.deriv_values(v, 2) + a * v, dtype=float)
        pre = LinearOperator((grid.n_points,) * 2, matvec=lambda v: grid.ifft(grid.fft(v) / (eps * k2 + abar)), dtype=float)
        count = [0]
        step, info = cg(op, res, rtol=1e-15, atol=1e-3 * tol, M=pre, maxiter=200, callback=lambda _: count.__setitem__(0, count[0] + 1))
        if info < 0 or not np.all(np.isfinite(step)):
            raise EllipticError("linear solve inside Newton failed")
        phi = phi + step
        res = _poisson_residual(phi, N, eps, params, grid)
        history.append(float(np.max(np.abs(res))))
        cg_its.append(count[0])
        if not math.isfinite(history[-1]):
            raise EllipticError("Newton iterate became non-finite")
    return phi, PoissonInfo(tuple(history), tuple(cg_its))


def poisson_solve(
    n: GridField,
    eps: float,
    params: PhysParams,
    phi_guess: GridField | None = None,
    tol: float | None = None,
    max_newton: int = DEFAULT_MAX_NEWTON,
    return_info: bool = False,
):
    """Newton solve of ``eps phi'' = 4 pi e (n_bar exp(kappa phi) - n)``.

    Each Newton correction solves the variable-coefficient linearization by
    conjugate gradients preconditioned with its constant-coefficient
    (mean) counterpart, which is diagonal in Fourier space.
    """
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    grid = n.grid
    nv = np.asarray(n, dtype=float)
    if np.min(nv) <= 0:
        raise DomainError(f"density must be positive (min n = {np.min(nv):.3e})")
    tol = 1e-12 * params.poisson_scale if tol is None else tol
    if phi_guess is None:
        guess = np.log(nv / params.n_bar) / params.kappa
    else:
        guess = np.array(phi_guess, dtype=float)
    phi, info = _newton(nv / params.n_bar, eps, params, grid, guess, tol, max_newton)
    out = GridField(phi, grid)
    return (out, info) if return_info else out


def _rhs_values(n, u, phi, eps, params: PhysParams, grid: Grid):
    V = params.V
    flux = grid.deriv_values(grid.dealias_values(n * u), 1)
    dn = (V * grid.deriv_values(n, 1) - flux) / eps
    ux = grid.deriv_values(u, 1)
    adv = 0.5 * grid.deriv_values(grid.dealias_values(u * u), 1)
    force = (params.T_i / params.mass_M) * grid.deriv_values(n, 1) / n
    force = force + (params.e_charge / params.mass_M) * grid.deriv_values(phi, 1)
    du = (V * ux - adv - force) / eps
    return dn, du


def ep_rhs(state: EpState, params: PhysParams) -> tuple[GridField, GridField]:
    """Time derivatives ``(n_t, u_t)`` of the scaled system at a state."""
    g = state.grid
    dn, du = _rhs_values(state.n.values, state.u.values, state.phi.values, state.eps, params, g)
    return GridField(dn, g), GridField(du, g)


def max_stable_dt(u, eps: float, params: PhysParams, grid: Grid, cfl_safety: float = DEFAULT_CFL) -> float:
    """``cfl_safety * eps * dx / c_max`` with ``c_max = max|V - u| + V``.

    In the moving frame the characteristic speeds are ``(u - V +/- c_s)/eps``
    with sound speed ``c_s = sqrt((T_i + T_e)/M) = V`` (Boltzmann electrons
    make the electron pressure isothermal), so the fast family runs at
    roughly ``2V/eps``.
    """
    c_max = float(np.max(np.abs(params.V - np.asarray(u)))) + params.V
    return cfl_safety * eps * grid.spacing / c_max


@dataclass(frozen=True)
class EpTrajectory:
    times: np.ndarray
    n: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    eps: float
    grid: Grid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.times), self.grid.n_points)
        for name in ("n", "u", "phi"):
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    def state(self, i: int) -> EpState:
        g = self.grid
        return EpState(GridField(self.n[i], g), GridField(self.u[i], g), GridField(self.phi[i], g), float(self.times[i]), self.eps)


def ep_solve(
    state0: EpState,
    tau: float,
    dt: float,
    out_every: int,
    params: PhysParams,
    cfl_safety: float = DEFAULT_CFL,
    poisson_tol: float | None = None,
    max_newton: int = DEFAULT_MAX_NEWTON,
) -> EpTrajectory:
    """Classical RK4 for ``(n, u)``, re-solving the potential at every stage.

    A negative ``dt`` integrates backwards over ``tau``. The step is checked
    against :func:`max_stable_dt` before each step.
    """
    grid, eps = state0.grid, state0.eps
    sign = -1.0 if dt < 0 else 1.0
    n_steps, h = step_schedule(tau, abs(dt), out_every)
    h *= sign
    tol = 1e-12 * params.poisson_scale if poisson_tol is None else poisson_tol
    nbar = params.n_bar

    n, u = state0.n.values.copy(), state0.u.values.copy()
    phi, info = _newton(n / nbar, eps, params, grid, state0.phi.values.copy(), tol, max_newton)
    t0 = state0.t
    times, ns, us, phis = [t0], [n.copy()], [u.copy()], [phi.copy()]
    worst_res, newton_total = info.residuals[-1], info.iterations

    def stage(nn, uu, guess, t):
        nonlocal newton_total
        if np.min(nn) <= 0:
            raise IntegrationError(f"density lost positivity near t = {t:.6g}")
        p, inf = _newton(nn / nbar, eps, params, grid, guess, tol, max_newton)
        newton_total += inf.iterations
        dn, du = _rhs_values(nn, uu, p, eps, params, grid)
        return dn, du, p

    for s in range(1, n_steps + 1):
        t = t0 + (s - 1) * h
        limit = max_stable_dt(u, eps, params, grid, cfl_safety)
        if abs(h) > limit * (1 + 1e-12):
            raise IntegrationError(f"CFL violated at t = {t:.6g}: |dt| = {abs(h):.3e} > {limit:.3e}")
        try:
            k1n, k1u, p1 = stage(n, u, phi, t)
            k2n, k2u, p2 = stage(n + 0.5 * h * k1n, u + 0.5 * h * k1u, p1, t + 0.5 * h)
            k3n, k3u, p3 = stage(n + 0.5 * h * k2n, u + 0.5 * h * k2u, p2, t + 0.5 * h)
            k4n, k4u, p4 = stage(n + h * k3n, u + h * k3u, p3, t + h)
        except EllipticError as exc:
            raise IntegrationError(f"Poisson solve failed near t = {t:.6g}: {exc}") from exc
        n = n + (h / 6.0) * (k1n + 2 * k2n + 2 * k3n + k4n)
        u = u + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
        t_new = t0 + s * h
        if not (np.all(np.isfinite(n)) and np.all(np.isfinite(u))):
            raise IntegrationError(f"non-finite state at t = {t_new:.6g}")
        if np.min(n) <= 0:
            raise IntegrationError(f"density lost positivity at t = {t_new:.6g}")
        phi, info = _newton(n / nbar, eps, params, grid, p4, tol, max_newton)
        worst_res = max(worst_res, info.residuals[-1])
        newton_total += info.iterations
        if s % out_every == 0:
            times.append(t_new)
            ns.append(n.copy())
            us.append(u.copy())
            phis.append(phi.copy())

    order = np.argsort(times) if sign < 0 else slice(None)
    meta = {"dt": h, "n_steps": n_steps, "max_poisson_residual": worst_res, "newton_iterations": newton_total}
    return EpTrajectory(
        np.asarray(times)[order], np.asarray(ns)[order], np.asarray(us)[order], np.asarray(phis)[order], eps, grid, meta
    )

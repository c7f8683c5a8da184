import numpy as np
import pytest

from epkdv.errors import DomainError, EllipticError, IntegrationError
from epkdv.euler_poisson import EpState, ep_rhs, ep_solve, max_stable_dt, poisson_solve
from epkdv.hierarchy import jet_cascade
from epkdv.kdv_solvers import kdv_soliton
from epkdv.params_grid import Grid, GridField, preset
from epkdv.remainder_diag import assemble_expansion, symbol_eigen


def _state(n, u, eps, p, **kw):
    return EpState(n, u, poisson_solve(n, eps, p, **kw), 0.0, eps)


def _smooth_state(g, p, eps, amp=0.05):
    N = 1 + amp * np.exp(-((g.x / 4) ** 2))
    return _state(GridField(p.n_bar * N, g), GridField(0.5 * amp * np.exp(-((g.x / 5) ** 2)), g), eps, p)


def test_equilibrium_potential(params, grid):
    phi = poisson_solve(GridField(np.full(grid.n_points, params.n_bar), grid), 0.1, params)
    assert np.max(np.abs(phi.values)) < 1e-13


def test_single_mode_potential_matches_linearization():
    p, g, eps, a = preset("cold"), Grid(128, 30.0), 0.1, 1e-6
    q = 2 * np.pi * 4 / g.length_L
    n = GridField(p.n_bar * (1 + a * np.sin(q * g.x)), g)
    phi = poisson_solve(n, eps, p, tol=1e-15 * p.poisson_scale)
    linear = p.T_e / p.e_charge * a * np.sin(q * g.x) / (1 + eps * p.T_e / (4 * np.pi * p.e_charge**2 * p.n_bar) * q**2)
    # the neglected quadratic term is O(a^2)
    assert np.max(np.abs(phi.values - linear)) <= 10 * a**2


def test_newton_converges_quadratically():
    p, g = preset("warm"), Grid(128, 30.0)
    n = GridField(p.n_bar * (1 + 0.5 * np.exp(-g.x**2 / 4)), g)
    _, info = poisson_solve(n, 0.1, p, phi_guess=g.zeros(), tol=1e-13 * p.poisson_scale, return_info=True)
    r = np.array(info.residuals)
    assert info.iterations >= 3
    big = r[:-1] > 1e-9
    ratios = r[1:][big] / r[:-1][big] ** 2
    assert np.all(ratios < 10.0)


def test_poisson_rejects_nonpositive_density(grid):
    p = preset("cold")
    with pytest.raises(DomainError):
        poisson_solve(GridField(np.zeros(grid.n_points), grid), 0.1, p)


def test_poisson_iteration_cap(grid):
    p = preset("cold")
    n = GridField(p.n_bar * (1 + 0.5 * np.cos(2 * np.pi * grid.x / grid.length_L)), grid)
    with pytest.raises(EllipticError):
        poisson_solve(n, 0.1, p, phi_guess=grid.zeros(), max_newton=1, tol=1e-16)


def test_equilibrium_rhs_and_trajectory(params):
    g, eps = Grid(64, 20.0), 0.1
    st = _state(GridField(np.full(64, params.n_bar), g), g.zeros(), eps, params)
    dn, du = ep_rhs(st, params)
    assert np.max(np.abs(dn.values)) == 0 and np.max(np.abs(du.values)) == 0
    traj = ep_solve(st, 0.05, max_stable_dt(st.u.values, eps, params, g) * 0.9, 1, params)
    assert np.max(np.abs(traj.n - params.n_bar)) < 1e-15 and np.max(np.abs(traj.u)) < 1e-15


def test_constant_state_has_zero_rhs(params):
    g, eps = Grid(64, 20.0), 0.2
    st = _state(GridField(np.full(64, 1.3 * params.n_bar), g), GridField(np.full(64, 0.4), g), eps, params)
    dn, du = ep_rhs(st, params)
    assert np.max(np.abs(dn.values)) < 1e-13 and np.max(np.abs(du.values)) < 1e-13


@pytest.mark.parametrize("name", ["cold", "warm"])
def test_rhs_of_assembled_expansion(name):
    p, g = preset(name), Grid(256, 60.0)
    cas = jet_cascade([kdv_soliton(g, p, 0.3).values, *np.zeros((3, 256))], p, g, J=4)
    errs = []
    for eps in (0.1, 0.05):
        st = assemble_expansion(cas, None, eps, p)
        dn, _ = ep_rhs(st, p)
        dN = sum(eps**k * cas.n[k - 1][1] for k in range(1, 5))
        errs.append(np.max(np.abs(dn.values / p.n_bar - dN)))
    assert np.log2(errs[0] / errs[1]) >= 3.5


def test_mass_conserved_and_poisson_tight():
    p, g, eps = preset("cold"), Grid(128, 40.0), 0.2
    st = _smooth_state(g, p, eps)
    dt = 0.9 * max_stable_dt(st.u.values, eps, p, g)
    traj = ep_solve(st, 40 * dt, dt, 10, p)
    mass = traj.n.sum(axis=1) * g.spacing
    assert np.max(np.abs(mass - mass[0])) <= 1e-10 * mass[0]
    assert traj.meta["max_poisson_residual"] <= 1e-12 * p.poisson_scale


def test_fourth_order_in_time():
    p, g, eps = preset("warm"), Grid(64, 40.0), 0.2
    st = _smooth_state(g, p, eps)
    dt = 0.9 * max_stable_dt(st.u.values, eps, p, g)
    tau = 16 * dt
    finals = [ep_solve(st, tau, dt / 2**j, 1, p, poisson_tol=1e-14 * p.poisson_scale).n[-1] for j in range(3)]
    e1 = np.max(np.abs(finals[0] - finals[2]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    # self-convergence: with a 4th-order scheme e1/e2 = (1 - 2^-8) / (2^-4 - 2^-8) ~ 17
    assert e1 / e2 >= 14.0


def test_time_reversibility():
    p, g, eps = preset("cold"), Grid(64, 40.0), 0.2
    st = _smooth_state(g, p, eps)
    dt = 0.5 * max_stable_dt(st.u.values, eps, p, g)
    fwd = ep_solve(st, 20 * dt, dt, 20, p)
    back = ep_solve(fwd.state(-1), 20 * dt, -dt, 20, p)
    rel = np.max(np.abs(back.n[0] - st.n.values)) / np.max(np.abs(st.n.values))
    assert rel <= 1e-6


def test_cfl_violation_is_reported():
    p, g, eps = preset("cold"), Grid(64, 40.0), 0.2
    st = _smooth_state(g, p, eps)
    with pytest.raises(IntegrationError, match="CFL"):
        ep_solve(st, 1.0, 10 * max_stable_dt(st.u.values, eps, p, g), 1, p)


def test_frequency_matches_symbol_eigenvalue():
    p, g, eps, A = preset("warm"), Grid(64, 20.0), 0.1, 1e-6
    m = 2
    xi = 2 * np.pi * m / g.length_L
    se = symbol_eigen((0.0, 0.0), xi, eps, p)
    a, b = se.P[:, 0]
    n = GridField(p.n_bar * (1 + A * a * np.cos(xi * g.x)), g)
    u = GridField(A * b * np.cos(xi * g.x), g)
    st = _state(n, u, eps, p, tol=1e-14)
    dt = 0.9 * max_stable_dt(u.values, eps, p, g)
    traj = ep_solve(st, 400 * dt, dt, 4, p, poisson_tol=1e-14)
    c = np.fft.rfft(traj.n / p.n_bar - 1, axis=1)[:, m]
    omega = np.polyfit(traj.times, np.unwrap(np.angle(c)), 1)[0]
    # modes evolve as exp(-lambda t)
    assert abs(omega) == pytest.approx(abs(se.lam_plus.imag), rel=0.01)


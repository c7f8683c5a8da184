import numpy as np
import pytest

from epkdv.errors import HierarchyError, IntegrationError, PreconditionError
from epkdv.kdv_solvers import (
    kdv_invariants,
    kdv_soliton,
    kdv_time_derivative,
    solve_kdv,
    solve_linearized_kdv,
    step_schedule,
)
from epkdv.params_grid import Grid, GridField, preset

from conftest import smooth_field


@pytest.fixture(scope="module")
def cold_soliton_run():
    p, g = preset("cold"), Grid(512, 50.0)
    n0 = kdv_soliton(g, p, speed=1.0)
    return p, g, solve_kdv(n0, 5.0, p, 0.005, out_every=100)


def test_zero_data_stays_zero(grid, params):
    traj = solve_kdv(grid.zeros(), 0.5, params, 0.05)
    assert not traj.states.any()


def test_soliton_is_travelling_wave(params):
    g = Grid(512, 60.0)
    c = 0.8
    n = kdv_soliton(g, params, speed=c)
    dn = kdv_time_derivative(n, None, None, params).values
    # d_t n = -c d_x n for a wave moving right at speed c
    assert np.max(np.abs(dn + c * g.deriv_values(n.values))) < 1e-10


def test_soliton_propagation(cold_soliton_run):
    p, g, traj = cold_soliton_run
    exact = kdv_soliton(g, p, speed=1.0, t=5.0).values
    err = np.sqrt(g.l2_sq_values(traj.states[-1] - exact))
    assert err <= 1e-6


@pytest.mark.parametrize("name", ["mass", "momentum", "energy"])
def test_conserved_functionals(cold_soliton_run, name):
    p, g, traj = cold_soliton_run
    vals = [kdv_invariants(s, g, p)[name] for s in traj.states]
    assert max(abs(v - vals[0]) for v in vals) <= 1e-8 * abs(vals[0])


@pytest.mark.parametrize("name", ["mass", "momentum", "energy"])
def test_invariants_have_zero_time_derivative(params, rng, name):
    g = Grid(256, 40.0)
    n = GridField(smooth_field(g, rng, modes=10), g)
    dn = kdv_time_derivative(n, None, None, params).values
    h = 1e-6
    rate = (kdv_invariants(n.values + h * dn, g, params)[name] - kdv_invariants(n.values - h * dn, g, params)[name]) / (2 * h)
    assert abs(rate) < 1e-6


def test_temporal_convergence_order():
    p, g = preset("cold"), Grid(256, 50.0)
    n0 = kdv_soliton(g, p, speed=1.0)
    exact = kdv_soliton(g, p, speed=1.0, t=1.0).values
    errs = [np.max(np.abs(solve_kdv(n0, 1.0, p, dt).states[-1] - exact)) for dt in (0.1, 0.05)]
    assert errs[0] / errs[1] >= 8.0


def test_single_step_matches_time_derivative(params, rng):
    g = Grid(128, 40.0)
    n = GridField(smooth_field(g, rng), g)
    dt = 1e-6
    stepped = solve_kdv(n, dt, params, dt).states[-1]
    euler = n.values + dt * kdv_time_derivative(n, None, None, params).values
    assert np.max(np.abs(stepped - euler)) < 10 * dt**2


def test_zero_time_derivative_for_zero():
    g, p = Grid(64, 10.0), preset("cold")
    assert not kdv_time_derivative(g.zeros(), None, None, p).values.any()


def test_blow_up_is_reported():
    g, p = Grid(64, 10.0), preset("cold")
    n0 = GridField(1e3 * np.exp(-g.x**2), g)
    with pytest.raises(IntegrationError), np.errstate(all="ignore"):
        solve_kdv(n0, 1.0, p, 0.5)


def test_linearized_zero_data_and_forcing(grid, params):
    n1 = solve_kdv(kdv_soliton(grid, params, 0.5), 0.5, params, 0.05)
    out = solve_linearized_kdv(2, grid.zeros(), None, n1, 0.5, params, 0.05)
    assert not out.states.any()


def test_airy_phase():
    p, g = preset("warm"), Grid(64, 20.0)
    q = 2 * np.pi * 3 / g.length_L
    tau = 1.0
    n0 = GridField(np.cos(q * g.x), g)
    n1 = (np.array([0.0, tau]), np.zeros((2, g.n_points)))
    out = solve_linearized_kdv(2, n0, None, n1, tau, p, 0.01).states[-1]
    # e^{iqx} picks up the phase e^{i delta q^3 t}
    exact = np.cos(q * g.x + p.delta * q**3 * tau)
    assert np.max(np.abs(out - exact)) < 1e-12


def test_manufactured_solution(params):
    g, tau = Grid(128, 40.0), 1.0
    n1 = lambda t: 0.5 / np.cosh(0.4 * (g.x - 0.3 * t)) ** 2
    m = lambda t: np.exp(-0.2 * (g.x + t) ** 2) * np.cos(t)
    m_t = lambda t: (-0.4 * (g.x + t) * np.cos(t) - np.sin(t)) * np.exp(-0.2 * (g.x + t) ** 2)
    d = g.deriv_values
    G = lambda t: m_t(t) + params.V * d(n1(t) * m(t)) + params.delta * d(m(t), 3)
    errs = []
    for dt in (0.02, 0.01):
        out = solve_linearized_kdv(3, GridField(m(0.0), g), G, n1, tau, params, dt).states[-1]
        errs.append(np.max(np.abs(out - m(tau))))
    assert errs[1] < 1e-7
    assert errs[0] / errs[1] > 8.0


def test_linearized_mass_conserved(params):
    g, tau = Grid(128, 40.0), 2.0
    n1 = solve_kdv(kdv_soliton(g, params, 0.5), tau, params, 0.05)
    n0 = GridField(np.exp(-0.3 * g.x**2), g)
    out = solve_linearized_kdv(2, n0, None, n1, tau, params, 0.05, out_every=4)
    mass = out.states.sum(axis=1) * g.spacing
    assert np.max(np.abs(mass - mass[0])) <= 1e-10 * abs(mass[0])


def test_short_forcing_range(grid, params):
    n1 = solve_kdv(kdv_soliton(grid, params, 0.5), 0.5, params, 0.05)
    G = (np.array([0.0, 0.2]), np.zeros((2, grid.n_points)))
    with pytest.raises(HierarchyError):
        solve_linearized_kdv(2, grid.zeros(), G, n1, 0.5, params, 0.05)


def test_step_schedule_lands_on_tau():
    n, h = step_schedule(1.0, 0.3, 2)
    assert n % 2 == 0 and n * h == pytest.approx(1.0) and h <= 0.3
    with pytest.raises(PreconditionError):
        step_schedule(-1.0, 0.1, 1)

"""Orchestration: initial data, profile sets, single EP runs and the eps-sweep."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, EpKdvError
from ..euler_poisson import EpState, EpTrajectory, ep_solve, max_stable_dt, poisson_solve
from ..hierarchy import N_PROFILES, ProfileSet, build_profiles
from ..kdv_solvers import kdv_soliton
from ..params_grid import Grid, GridField, PhysParams
from ..remainder_diag import (
    RemainderTrajectory,
    assemble_expansion,
    extract_trajectory,
    lemma31_check,
    norm_report,
    remainder_system_residual,
)
from .config import ExperimentConfig
from .io import read_trajectory

__all__ = [
    "initial_densities",
    "build_profile_set",
    "ep_step_for",
    "EpRun",
    "run_ep",
    "first_profile_error",
    "SweepRow",
    "SweepReport",
    "observed_orders",
    "run_sweep",
    "SWEEP_COLUMNS",
    "Check",
    "sweep_checks",
    "report_from_csv",
]

log = logging.getLogger(__name__)


def initial_densities(config: ExperimentConfig, params: PhysParams, grid: Grid) -> list[GridField]:
    """``n^(1..4)`` at t = 0: a soliton (higher profiles zero), zeros for speed 0, or the first record of a file."""
    if config.init_file is None:
        if config.soliton_speed == 0:
            return [grid.zeros() for _ in range(N_PROFILES)]
        n1 = kdv_soliton(grid, params, speed=config.soliton_speed, center=config.soliton_center)
        return [n1] + [grid.zeros() for _ in range(N_PROFILES - 1)]
    _, fields, fgrid, _ = read_trajectory(config.init_file)
    if fgrid.n_points != grid.n_points or not math.isclose(fgrid.length_L, grid.length_L):
        raise ConfigError("initial-data file does not match the configured grid")
    if "n1" not in fields:
        raise ConfigError("initial-data file must contain a field named n1")
    return [grid.field(fields[f"n{k}"][0]) if f"n{k}" in fields else grid.zeros() for k in range(1, N_PROFILES + 1)]


def build_profile_set(config: ExperimentConfig) -> ProfileSet:
    params, grid = config.params(), config.grid()
    every = int(round(config.output_interval / config.dt_profiles))
    return build_profiles(
        initial_densities(config, params, grid), config.tau, params, config.dt_profiles,
        out_every=every, mean_tol=config.mean_tol,
    )


def ep_step_for(eps: float, profiles: ProfileSet, config: ExperimentConfig) -> tuple[float, int]:
    """``(dt, steps per output)``: the largest step below the CFL bound that tiles the output interval.

    The bound is taken over the assembled expansion at every stored time, so
    the check inside the solver only trips if the true solution departs
    from the expansion by more than the velocity margin.
    """
    params, grid = profiles.params, profiles.grid
    if config.dt_ep is not None:
        m = max(1, math.ceil(config.output_interval / config.dt_ep - 1e-9))
        return config.output_interval / m, m
    limit = math.inf
    for i in range(profiles.n_times):
        u = assemble_expansion(profiles.slice(i), None, eps, params).u.values
        limit = min(limit, max_stable_dt(u, eps, params, grid, config.cfl_safety))
    m = max(1, math.ceil(config.output_interval / (0.9 * limit)))
    return config.output_interval / m, m


@dataclass(frozen=True)
class EpRun:
    eps: float
    trajectory: EpTrajectory
    remainders: RemainderTrajectory


def run_ep(eps: float, profiles: ProfileSet, config: ExperimentConfig) -> EpRun:
    """Well-prepared data (expansion with zero remainder, potential from Poisson), solve, extract."""
    params = profiles.params
    tol = config.poisson_tol * params.poisson_scale
    st = assemble_expansion(profiles.slice(0), None, eps, params)
    phi = poisson_solve(st.n, eps, params, phi_guess=st.phi.values, tol=tol, max_newton=config.max_newton)
    state0 = EpState(st.n, st.u, phi, 0.0, eps)
    dt, every = ep_step_for(eps, profiles, config)
    traj = ep_solve(state0, config.tau, dt, every, params, cfl_safety=config.cfl_safety,
                    poisson_tol=tol, max_newton=config.max_newton)
    return EpRun(eps, traj, extract_trajectory(traj, profiles, params))


def first_profile_error(traj: EpTrajectory, profiles: ProfileSet, i: int = -1) -> float:
    """``|| (n/n_bar - 1)/eps - n^(1) ||_H2`` at output index ``i``."""
    grid, eps = traj.grid, traj.eps
    t = traj.times[i]
    n1 = profiles.n[0, profiles.index_of(t)]
    err = (traj.n[i] / profiles.params.n_bar - 1.0) / eps - n1
    return math.sqrt(sum(float(grid.l2_sq_values(err, j)) for j in range(3)))


SWEEP_COLUMNS = [
    "eps", "status", "reason", "dt", "n_steps",
    "sup_h2", "sup_eps_norm", "sup_full_energy", "first_profile_error",
    "elliptic_low_0", "elliptic_high_0", "elliptic_low_1", "elliptic_high_1", "elliptic_low_2", "elliptic_high_2",
    "resid_mass", "resid_momentum", "resid_poisson", "max_poisson_residual",
]


@dataclass
class SweepRow:
    eps: float
    status: str = "ok"
    reason: str = ""
    dt: float = math.nan
    n_steps: int = 0
    sup_h2: float = math.nan
    sup_eps_norm: float = math.nan
    sup_full_energy: float = math.nan
    first_profile_error: float = math.nan
    elliptic_low: tuple = (math.nan,) * 3
    elliptic_high: tuple = (math.nan,) * 3
    resid_mass: float = math.nan
    resid_momentum: float = math.nan
    resid_poisson: float = math.nan
    max_poisson_residual: float = math.nan
    wall_time: float = math.nan
    norms_over_time: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_row(self) -> list:
        lem = [v for pair in zip(self.elliptic_low, self.elliptic_high) for v in pair]
        return [
            self.eps, self.status, self.reason, self.dt, self.n_steps,
            self.sup_h2, self.sup_eps_norm, self.sup_full_energy, self.first_profile_error,
            *lem, self.resid_mass, self.resid_momentum, self.resid_poisson, self.max_poisson_residual,
        ]


def _sweep_row(eps: float, profiles: ProfileSet, config: ExperimentConfig) -> SweepRow:
    t0 = time.perf_counter()
    row = SweepRow(eps)
    try:
        run = run_ep(eps, profiles, config)
        traj, rt = run.trajectory, run.remainders
        row.dt, row.n_steps = abs(traj.meta["dt"]), traj.meta["n_steps"]
        row.max_poisson_residual = traj.meta["max_poisson_residual"]
        reports = [norm_report(rt.state(i)) for i in range(len(rt.times))]
        row.norms_over_time = [(r.t, r.h2_triple, r.eps_norm, r.full_energy) for r in reports]
        row.sup_h2 = max(r.h2_triple for r in reports)
        row.sup_eps_norm = max(r.eps_norm for r in reports)
        row.sup_full_energy = max(r.full_energy for r in reports)
        row.first_profile_error = first_profile_error(traj, profiles)
        # ratios at t = tau: the remainder vanishes at t = 0 by construction,
        # so early ratios divide round-off by round-off
        lows, highs = [], []
        for a in range(3):
            r = lemma31_check(rt.state(len(rt.times) - 1), a)
            lows.append(math.nan if r.degenerate else r.ratio_low)
            highs.append(math.nan if r.degenerate else r.ratio_high)
        row.elliptic_low, row.elliptic_high = tuple(lows), tuple(highs)
        if len(rt.times) >= 5:
            m = remainder_system_residual(rt, profiles, eps, profiles.params).max()
            row.resid_mass, row.resid_momentum, row.resid_poisson = m["mass"], m["momentum"], m["poisson"]
    except EpKdvError as exc:
        row.status, row.reason = "failed", f"{type(exc).__name__}: {exc}"
        log.warning("eps = %g failed: %s", eps, row.reason)
    row.wall_time = time.perf_counter() - t0
    return row


def observed_orders(eps_list, values) -> list[float]:
    """``log(v_i / v_{i+1}) / log(eps_i / eps_{i+1})`` for successive rows."""
    out = []
    for (e0, v0), (e1, v1) in zip(zip(eps_list, values), zip(eps_list[1:], values[1:])):
        if v0 > 0 and v1 > 0 and math.isfinite(v0) and math.isfinite(v1):
            out.append(math.log(v0 / v1) / math.log(e0 / e1))
        else:
            out.append(math.nan)
    return out


@dataclass
class SweepReport:
    preset: str
    rows: list
    tau: float

    @property
    def eps_list(self) -> list:
        return [r.eps for r in self.rows]

    def first_profile_orders(self) -> list[float]:
        return observed_orders(self.eps_list, [r.first_profile_error for r in self.rows])

    def csv_rows(self) -> list:
        return [r.csv_row() for r in self.rows]

    def timing_rows(self) -> list:
        return [[r.eps, r.wall_time] for r in self.rows]

    def summary(self) -> str:
        lines = [f"eps-sweep, preset {self.preset}, tau = {self.tau:g}"]
        lines.append(f"{'eps':>8} {'status':>7} {'sup H2':>11} {'sup eps-norm':>13} {'first-profile':>14} {'wall [s]':>9}")
        for r in self.rows:
            lines.append(
                f"{r.eps:8.4g} {r.status:>7} {r.sup_h2:11.4e} {r.sup_eps_norm:13.4e} "
                f"{r.first_profile_error:14.4e} {r.wall_time:9.2f}"
            )
            if not r.ok:
                lines.append(f"         reason: {r.reason}")
        orders = ", ".join(f"{o:.3f}" for o in self.first_profile_orders())
        lines.append(f"observed order of the first-profile error: {orders or 'n/a'}")
        return "\n".join(lines)


def run_sweep(config: ExperimentConfig, profiles: ProfileSet | None = None, eps_list=None) -> SweepReport:
    """One row per eps; a failing row is recorded and the sweep continues."""
    eps_list = tuple(config.eps_list if eps_list is None else eps_list)
    if not eps_list:
        raise ConfigError("eps_list is empty")
    if profiles is None:
        profiles = build_profile_set(config)
    if config.workers > 1 and len(eps_list) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_sweep_row, eps_list, [profiles] * len(eps_list), [config] * len(eps_list)))
    else:
        rows = [_sweep_row(e, profiles, config) for e in eps_list]
    return SweepReport(config.preset, rows, config.tau)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _ratio_spread(values) -> tuple[float, float]:
    """Largest ratio between neighbouring rows and largest ratio to the first row."""
    v = [float(x) for x in values]
    nb = max((max(a / b, b / a) for a, b in zip(v, v[1:])), default=1.0)
    first = max((x / v[0] for x in v), default=1.0)
    return nb, first


def sweep_checks(report: SweepReport, cold: bool, order_min: float = 1.8, spread: float = 2.0, cap: float = 10.0) -> list[Check]:
    """Uniformity, convergence-order and elliptic-constant checks over the rows."""
    out = []
    bad = [r.eps for r in report.rows if not r.ok]
    out.append(Check("rows_completed", not bad, f"failed rows: {bad}" if bad else "all rows completed"))
    rows = [r for r in report.rows if r.ok]
    if len(rows) < 2:
        out.append(Check("enough_rows", False, "fewer than two completed rows"))
        return out
    quantities = [("sup_h2", [r.sup_h2 for r in rows])]
    if cold:
        quantities.append(("sup_full_energy", [r.sup_full_energy for r in rows]))
    for name, vals in quantities:
        nb, first = _ratio_spread(vals)
        ok = nb <= spread and first <= cap
        out.append(Check(f"uniform_{name}", ok, f"neighbour ratio {nb:.3f} (<= {spread}), max/first {first:.3f} (<= {cap})"))
    orders = observed_orders([r.eps for r in rows], [r.first_profile_error for r in rows])
    ok = all(math.isfinite(o) and o >= order_min for o in orders)
    out.append(Check("first_profile_order", ok, "orders " + ", ".join(f"{o:.3f}" for o in orders) + f" (>= {order_min})"))
    worst, ok = 1.0, True
    for a in range(3):
        for attr in ("elliptic_low", "elliptic_high"):
            base = getattr(rows[0], attr)[a]
            for r in rows[1:]:
                f = getattr(r, attr)[a] / base
                f = max(f, 1.0 / f) if f > 0 else math.inf
                worst = max(worst, f)
                ok = ok and f <= spread
    out.append(Check("elliptic_ratio_stability", ok, f"largest change against the first row {worst:.3f} (<= {spread})"))
    return out


def report_from_csv(header, rows, preset: str, tau: float) -> SweepReport:
    if header != SWEEP_COLUMNS:
        raise ConfigError("sweep table has unexpected columns")
    out = []
    for raw in rows:
        d = dict(zip(header, raw))
        f = lambda k: float(d[k]) if d[k] != "" else math.nan
        out.append(SweepRow(
            eps=f("eps"), status=d["status"], reason=d["reason"], dt=f("dt"), n_steps=int(d["n_steps"]),
            sup_h2=f("sup_h2"), sup_eps_norm=f("sup_eps_norm"), sup_full_energy=f("sup_full_energy"),
            first_profile_error=f("first_profile_error"),
            elliptic_low=tuple(f(f"elliptic_low_{a}") for a in range(3)),
            elliptic_high=tuple(f(f"elliptic_high_{a}") for a in range(3)),
            resid_mass=f("resid_mass"), resid_momentum=f("resid_momentum"), resid_poisson=f("resid_poisson"),
            max_poisson_residual=f("max_poisson_residual"),
        ))
    return SweepReport(preset, out, tau)

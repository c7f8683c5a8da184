"""Command-line entry point: ``epkdv {kdv,profiles,ep,sweep,report}``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 acceptance threshold missed in ``--check`` mode.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, EpKdvError, NumericError
from ..hierarchy import N_PROFILES, profile_residuals
from ..kdv_solvers import kdv_invariants, kdv_soliton, solve_kdv
from ..remainder_diag import lemma31_check, norm_report
from .config import DEFAULTS, ExperimentConfig, load_config
from .io import read_csv, write_csv, write_trajectory
from .sweep import (
    SWEEP_COLUMNS,
    build_profile_set,
    initial_densities,
    report_from_csv,
    run_ep,
    run_sweep,
    sweep_checks,
)

__all__ = ["main", "OUT_ENV", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_CHECK"]

OUT_ENV = "EPKDV_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
KDV_SHAPE_TOL = 1e-6
KDV_DRIFT_TOL = 1e-8

log = logging.getLogger("epkdv")


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; route through our handler
        raise _ArgError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="epkdv", description="KdV limit of the scaled Euler-Poisson system")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [
        ("kdv", "solve the first-profile KdV equation and tabulate its invariants"),
        ("profiles", "build the four-profile hierarchy and tabulate residuals"),
        ("ep", "solve the Euler-Poisson system at one eps and extract remainders"),
        ("sweep", "run the eps-sweep and write the convergence tables"),
        ("report", "summarise (and optionally check) a finished sweep"),
    ]:
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("--config", type=Path, help="TOML experiment file (defaults built in)")
        s.add_argument("--out", type=Path, help=f"output directory (overrides ${OUT_ENV} and the config)")
        s.add_argument("--eps", help="comma-separated eps values (overrides the config)")
        s.add_argument("--check", action="store_true", help="exit with code 4 when an acceptance threshold is missed")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _parse_eps(text: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse --eps {text!r}") from exc
    if not vals:
        raise ConfigError("--eps is empty")
    return vals


def _resolve(args) -> tuple[ExperimentConfig, Path]:
    config = load_config(args.config) if args.config else DEFAULTS
    if args.eps:
        config = config.replace(eps_list=_parse_eps(args.eps))
    out = args.out or (Path(os.environ[OUT_ENV]) if os.environ.get(OUT_ENV) else None)
    out = out or Path(config.output_dir or "epkdv_out")
    out.mkdir(parents=True, exist_ok=True)
    return config, out


def _drift(series):
    ref = series[0]
    scale = abs(ref) if ref != 0 else 1.0
    return [abs(v - ref) / scale for v in series]


def cmd_kdv(config: ExperimentConfig, out: Path, check: bool) -> int:
    params, grid = config.params(), config.grid()
    n0 = initial_densities(config, params, grid)[0]
    every = max(1, int(round(config.output_interval / config.dt_kdv)))
    traj = solve_kdv(n0, config.tau, params, config.dt_kdv, out_every=every)
    inv = [kdv_invariants(s, grid, params) for s in traj.states]
    exact = None
    if config.init_file is None:
        exact = lambda t: (kdv_soliton(grid, params, config.soliton_speed, config.soliton_center, t).values
                           if config.soliton_speed > 0 else np.zeros(grid.n_points))
    drifts = {k: _drift([d[k] for d in inv]) for k in ("mass", "momentum", "energy")}
    rows = []
    for i, t in enumerate(traj.times):
        shape = math.sqrt(grid.l2_sq_values(traj.states[i] - exact(t))) if exact else math.nan
        rows.append([t, inv[i]["mass"], inv[i]["momentum"], inv[i]["energy"],
                     drifts["mass"][i], drifts["momentum"][i], drifts["energy"][i], shape])
    write_trajectory(out / "kdv_trajectory.bin", traj.times, {"n1": traj.states}, grid, {"dt": traj.meta.get("dt")})
    write_csv(out / "kdv_invariants.csv",
              ["t", "mass", "momentum", "energy", "drift_mass", "drift_momentum", "drift_energy", "shape_error"], rows)
    final = rows[-1]
    worst = max(max(d) for d in drifts.values())
    print(f"kdv: {len(traj.times)} outputs to t = {traj.times[-1]:g}; final shape error {final[-1]:.3e}; "
          f"largest relative invariant drift {worst:.3e}")
    if check:
        ok = worst <= KDV_DRIFT_TOL and (not exact or final[-1] <= KDV_SHAPE_TOL)
        print(f"check kdv: {'PASS' if ok else 'FAIL'}")
        return EXIT_OK if ok else EXIT_CHECK
    return EXIT_OK


def cmd_profiles(config: ExperimentConfig, out: Path, check: bool) -> int:
    prof = build_profile_set(config)
    fields = {}
    for k in range(N_PROFILES):
        fields[f"n{k + 1}"], fields[f"u{k + 1}"], fields[f"phi{k + 1}"] = prof.n[k], prof.u[k], prof.phi[k]
    for k in range(N_PROFILES - 1):
        fields[f"h{k + 1}"], fields[f"g{k + 1}"], fields[f"G{k + 1}"] = prof.h[k], prof.g[k], prof.G[k]
    write_trajectory(out / "profiles.bin", prof.times, fields, prof.grid, prof.meta)
    rows, worst = [], 0.0
    for i, t in enumerate(prof.times):
        res = profile_residuals(prof.cascade(i), prof.params)
        for (eq, k), v in sorted(res.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            rows.append([t, eq, k, v])
            worst = max(worst, v)
    write_csv(out / "residual_cascade.csv", ["t", "equation", "order", "relative_l2"], rows)
    print(f"profiles: {prof.n_times} outputs to t = {prof.times[-1]:g}; flux sign {prof.meta.get('flux_sign')}; "
          f"largest cascade residual {worst:.3e}")
    if check:
        ok = worst <= config.resid_tol
        print(f"check profiles: {'PASS' if ok else 'FAIL'}")
        return EXIT_OK if ok else EXIT_CHECK
    return EXIT_OK


def cmd_ep(config: ExperimentConfig, out: Path, check: bool) -> int:
    eps = config.eps_list[0]
    prof = build_profile_set(config)
    run = run_ep(eps, prof, config)
    tr, rt = run.trajectory, run.remainders
    tag = f"{eps:g}"
    write_trajectory(out / f"ep_eps{tag}.bin", tr.times, {"n": tr.n, "u": tr.u, "phi": tr.phi}, tr.grid,
                     {"eps": eps, **{k: v for k, v in tr.meta.items()}})
    write_trajectory(out / f"remainder_eps{tag}.bin", rt.times, {"n_R": rt.n_R, "u_R": rt.u_R, "phi_R": rt.phi_R},
                     rt.grid, {"eps": eps})
    rows = []
    for i in range(len(rt.times)):
        st = rt.state(i)
        nr = norm_report(st)
        lem = [lemma31_check(st, a) for a in range(3)]
        rows.append([nr.t, nr.h2_triple, nr.eps_norm, nr.full_energy, *nr.components.values(),
                     *[v for r in lem for v in (r.ratio_low, r.ratio_high)]])
    comp = list(norm_report(rt.state(0)).components)
    write_csv(out / f"ep_norms_eps{tag}.csv",
              ["t", "h2_triple", "eps_norm", "full_energy", *comp,
               "elliptic_low_0", "elliptic_high_0", "elliptic_low_1", "elliptic_high_1", "elliptic_low_2", "elliptic_high_2"], rows)
    print(f"ep: eps = {eps:g}, {tr.meta['n_steps']} steps of {abs(tr.meta['dt']):.3e}; "
          f"sup H2 remainder {max(r[1] for r in rows):.4e}")
    return EXIT_OK


def _write_sweep(report, config, out: Path):
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, report.csv_rows())
    write_csv(out / "sweep_norms.csv", ["eps", "t", "h2_triple", "eps_norm", "full_energy"],
              [[r.eps, *vals] for r in report.rows for vals in r.norms_over_time])
    write_csv(out / "sweep_timing.csv", ["eps", "wall_time_s"], report.timing_rows())
    meta = {"preset": config.preset, "tau": config.tau, "cold": config.params().T_i == 0}
    (out / "sweep_meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    (out / "sweep_summary.txt").write_text(report.summary() + "\n")


def _print_checks(report, cold: bool, check: bool) -> int:
    checks = sweep_checks(report, cold)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    if check and not all(c.passed for c in checks):
        return EXIT_CHECK
    return EXIT_OK


def cmd_sweep(config: ExperimentConfig, out: Path, check: bool) -> int:
    report = run_sweep(config)
    _write_sweep(report, config, out)
    print(report.summary())
    return _print_checks(report, config.params().T_i == 0, check)


def cmd_report(config: ExperimentConfig, out: Path, check: bool) -> int:
    path = out / "sweep.csv"
    if not path.is_file():
        raise ConfigError(f"no sweep table at {path}; run the sweep first")
    meta_path = out / "sweep_meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {
        "preset": config.preset, "tau": config.tau, "cold": config.params().T_i == 0}
    header, rows = read_csv(path)
    report = report_from_csv(header, rows, meta["preset"], meta["tau"])
    print(report.summary())
    return _print_checks(report, meta["cold"], check)


COMMANDS = {"kdv": cmd_kdv, "profiles": cmd_profiles, "ep": cmd_ep, "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except _ArgError as exc:
        print(f"epkdv: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config, out = _resolve(args)
        return COMMANDS[args.command](config, out, args.check)
    except ConfigError as exc:
        print(f"epkdv: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, EpKdvError) as exc:
        print(f"epkdv: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

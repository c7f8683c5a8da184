"""
How the remainder behaves as eps shrinks
========================================

A reduced version of the default experiment: the same soliton, a coarser
grid and a shorter horizon. Each row integrates Euler-Poisson at one eps
and records the largest remainder norm over the run, the error of the
first profile, and the two-sided elliptic ratios.

Run with ``python demos/03_eps_sweep.py`` (a few minutes). The full
experiment is ``epkdv sweep``.
"""

from epkdv.harness.config import DEFAULTS
from epkdv.harness.sweep import run_sweep, sweep_checks

for name in ("cold", "warm"):
    config = DEFAULTS.replace(preset=name, n_points=256, tau=0.5, eps_list=(0.2, 0.1, 0.05))
    report = run_sweep(config)
    print(report.summary())
    for check in sweep_checks(report, cold=(name == "cold")):
        print(f"  {check.name:26s} {'ok' if check.passed else 'no'}  {check.detail}")
    print()

"""Configuration, persistence, orchestration and the command-line interface."""

from .config import DEFAULTS, ExperimentConfig, config_from_dict, load_config
from .io import read_csv, read_trajectory, write_csv, write_trajectory
from .sweep import SweepReport, SweepRow, run_ep, run_sweep, sweep_checks

__all__ = [
    "DEFAULTS",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "read_csv",
    "read_trajectory",
    "write_csv",
    "write_trajectory",
    "SweepReport",
    "SweepRow",
    "run_ep",
    "run_sweep",
    "sweep_checks",
]

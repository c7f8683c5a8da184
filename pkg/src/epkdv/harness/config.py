"""Experiment configuration: one TOML file holds every tolerance and step rule.

Example::

    [physics]
    preset = "cold"            # or "warm"; or give e, M, T_i, T_e, n_bar

    [grid]
    n_points = 512
    length_L = 100.0

    [time]
    tau = 2.0
    output_interval = 0.1
    dt_profiles = 0.01
    dt_kdv = 0.005
    cfl_safety = 0.25

    [sweep]
    eps_list = [0.2, 0.1, 0.05]
    workers = 1

    [initial]
    soliton_speed = 0.3
    soliton_center = 0.0

    [tolerances]
    resid_tol = 1e-8
    mean_tol = 1e-8
    poisson_tol = 1e-12       # relative to 4 pi e n_bar
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from ..errors import ConfigError, ParameterError
from ..params_grid import PRESETS, Grid, PhysParams, make_params

__all__ = ["ExperimentConfig", "load_config", "config_from_dict", "DEFAULTS"]

_SECTIONS = {
    "physics": {"preset", "e", "M", "T_i", "T_e", "n_bar"},
    "grid": {"n_points", "length_L"},
    "time": {"tau", "output_interval", "dt_profiles", "dt_kdv", "dt_ep", "cfl_safety"},
    "sweep": {"eps_list", "workers"},
    "initial": {"soliton_speed", "soliton_center", "file"},
    "tolerances": {"resid_tol", "mean_tol", "poisson_tol", "max_newton"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "cold"
    custom_params: tuple | None = None  # (e, M, T_i, T_e, n_bar) when preset == "custom"
    n_points: int = 512
    length_L: float = 100.0
    tau: float = 2.0
    output_interval: float = 0.1
    dt_profiles: float = 0.01
    dt_kdv: float = 0.005
    dt_ep: float | None = None  # None: largest CFL-admissible step dividing output_interval
    cfl_safety: float = 0.25
    eps_list: tuple = (0.2, 0.1, 0.05)
    workers: int = 1
    soliton_speed: float = 0.3
    soliton_center: float = 0.0
    init_file: str | None = None
    resid_tol: float = 1e-8
    mean_tol: float = 1e-8
    poisson_tol: float = 1e-12
    max_newton: int = 50
    output_dir: str | None = None

    def __post_init__(self):
        _validate(self)

    def params(self) -> PhysParams:
        if self.preset == "custom":
            return make_params(*self.custom_params)
        return PRESETS[self.preset]

    def grid(self) -> Grid:
        return Grid(self.n_points, self.length_L)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)



def _positive(name, value):
    if not (isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be a positive number, got {value!r}")


def _is_multiple(a: float, b: float) -> bool:
    r = a / b
    return abs(r - round(r)) <= 1e-9 * max(1.0, r)


def _validate(c: ExperimentConfig) -> None:
    if c.preset not in ("cold", "warm", "custom"):
        raise ConfigError(f"unknown preset {c.preset!r}")
    if c.preset == "custom":
        if c.custom_params is None or len(c.custom_params) != 5:
            raise ConfigError("custom physics needs e, M, T_i, T_e and n_bar")
        try:
            make_params(*c.custom_params)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
    if not isinstance(c.n_points, int) or c.n_points < 8 or c.n_points % 2:
        raise ConfigError(f"n_points must be an even integer >= 8, got {c.n_points!r}")
    for name in ("length_L", "tau", "output_interval", "dt_profiles", "dt_kdv", "cfl_safety",
                 "resid_tol", "mean_tol", "poisson_tol"):
        _positive(name, getattr(c, name))
    if not (isinstance(c.soliton_speed, (int, float)) and math.isfinite(c.soliton_speed) and c.soliton_speed >= 0):
        raise ConfigError(f"soliton_speed must be >= 0 (0 means zero data), got {c.soliton_speed!r}")
    if c.dt_ep is not None:
        _positive("dt_ep", c.dt_ep)
    if c.output_interval > c.tau or not _is_multiple(c.tau, c.output_interval):
        raise ConfigError("tau must be a whole multiple of output_interval")
    if not _is_multiple(c.output_interval, c.dt_profiles):
        raise ConfigError("output_interval must be a whole multiple of dt_profiles")
    eps = tuple(c.eps_list)
    if not eps:
        raise ConfigError("eps_list is empty")
    for e in eps:
        _positive("eps_list entry", e)
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError(f"eps_list must be strictly decreasing, got {list(eps)}")
    if not isinstance(c.workers, int) or c.workers < 1:
        raise ConfigError("workers must be a positive integer")
    if not isinstance(c.max_newton, int) or c.max_newton < 1:
        raise ConfigError("max_newton must be a positive integer")
    if c.init_file is not None and not Path(c.init_file).is_file():
        raise ConfigError(f"initial-data file {c.init_file!r} does not exist")


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Build a validated config from the nested TOML mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for sec, body in raw.items():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{sec}] must be a table")
        extra = set(body) - _SECTIONS[sec]
        if extra:
            raise ConfigError(f"unknown keys in [{sec}]: {sorted(extra)}")
    get = lambda sec, key, default=None: raw.get(sec, {}).get(key, default)
    kw = {}
    phys = raw.get("physics", {})
    custom = {"e", "M", "T_i", "T_e", "n_bar"} & set(phys)
    if custom:
        if "preset" in phys and phys["preset"] != "custom":
            raise ConfigError("give either a preset name or explicit constants, not both")
        missing = {"e", "M", "T_i", "T_e", "n_bar"} - custom
        if missing:
            raise ConfigError(f"custom physics is missing {sorted(missing)}")
        kw["preset"] = "custom"
        kw["custom_params"] = tuple(float(phys[k]) for k in ("e", "M", "T_i", "T_e", "n_bar"))
    elif "preset" in phys:
        kw["preset"] = phys["preset"]
    mapping = [
        ("grid", "n_points", "n_points"), ("grid", "length_L", "length_L"),
        ("time", "tau", "tau"), ("time", "output_interval", "output_interval"),
        ("time", "dt_profiles", "dt_profiles"), ("time", "dt_kdv", "dt_kdv"),
        ("time", "dt_ep", "dt_ep"), ("time", "cfl_safety", "cfl_safety"),
        ("sweep", "workers", "workers"),
        ("initial", "soliton_speed", "soliton_speed"), ("initial", "soliton_center", "soliton_center"),
        ("tolerances", "resid_tol", "resid_tol"), ("tolerances", "mean_tol", "mean_tol"),
        ("tolerances", "poisson_tol", "poisson_tol"), ("tolerances", "max_newton", "max_newton"),
        ("output", "dir", "output_dir"),
    ]
    for sec, key, attr in mapping:
        val = get(sec, key)
        if val is not None:
            kw[attr] = val
    if get("sweep", "eps_list") is not None:
        lst = get("sweep", "eps_list")
        if not isinstance(lst, list):
            raise ConfigError("eps_list must be an array")
        kw["eps_list"] = tuple(lst)
    f = get("initial", "file")
    if f is not None:
        p = Path(f)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        kw["init_file"] = str(p)
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:  # pragma: no cover - guarded by key checks
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {str(path)!r} not found") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {str(path)!r} is not valid TOML: {exc}") from exc
    return config_from_dict(raw, base_dir=path.parent)


DEFAULTS = ExperimentConfig()

"""Numerical study of the KdV limit of the one-dimensional Euler-Poisson system.

The package builds the four-profile asymptotic expansion around a KdV
soliton, solves the scaled Euler-Poisson system directly at finite eps,
and measures the remainder between the two.
"""

from .errors import (
    ConfigError,
    DomainError,
    EllipticError,
    EpKdvError,
    HierarchyError,
    IntegrabilityError,
    IntegrationError,
    NumericError,
    ParameterError,
    PreconditionError,
    ShapeError,
)
from .eps_series import EpsSeries, ProfileSlice, ep_residual_series, series_exp, series_inv1p, series_mul
from .euler_poisson import EpState, EpTrajectory, ep_rhs, ep_solve, max_stable_dt, poisson_solve
from .hierarchy import ProfileSet, build_profiles, extract_forcings, first_profile, profile_residuals, resolve_flux_sign
from .kdv_solvers import KdvTrajectory, kdv_invariants, kdv_soliton, kdv_time_derivative, solve_kdv, solve_linearized_kdv
from .params_grid import PRESETS, Grid, GridField, PhysParams, acoustic_determinant, acoustic_matrix, make_params, preset
from .remainder_diag import (
    NormReport,
    RemainderState,
    assemble_expansion,
    extract_remainder,
    lemma31_check,
    norm_report,
    remainder_system_residual,
    symbol_eigen,
)
from .spectral_ops import antideriv_zero_mean, dealias, deriv, sobolev_norm

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "EllipticError", "EpKdvError", "HierarchyError", "IntegrabilityError",
    "IntegrationError", "NumericError", "ParameterError", "PreconditionError", "ShapeError",
    "EpsSeries", "ProfileSlice", "ep_residual_series", "series_exp", "series_inv1p", "series_mul",
    "EpState", "EpTrajectory", "ep_rhs", "ep_solve", "max_stable_dt", "poisson_solve",
    "ProfileSet", "build_profiles", "extract_forcings", "first_profile", "profile_residuals", "resolve_flux_sign",
    "KdvTrajectory", "kdv_invariants", "kdv_soliton", "kdv_time_derivative", "solve_kdv", "solve_linearized_kdv",
    "PRESETS", "Grid", "GridField", "PhysParams", "acoustic_determinant", "acoustic_matrix", "make_params", "preset",
    "NormReport", "RemainderState", "assemble_expansion", "extract_remainder", "lemma31_check", "norm_report",
    "remainder_system_residual", "symbol_eigen",
    "antideriv_zero_mean", "dealias", "deriv", "sobolev_norm",
]

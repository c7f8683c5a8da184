"""Fourier kernels on periodic GridFields: derivatives, antiderivative, dealiasing, norms."""

from __future__ import annotations

import logging

import numpy as np

from .errors import IntegrabilityError, NumericError, PreconditionError
from .params_grid import GridField

__all__ = ["deriv", "antideriv_zero_mean", "dealias", "sobolev_norm", "DEFAULT_MEAN_TOL"]

log = logging.getLogger(__name__)

DEFAULT_MEAN_TOL = 1e-8


def _wrap(values, grid) -> GridField:
    if not np.all(np.isfinite(values)):
        raise NumericError("spectral operation produced non-finite values")
    return GridField(values, grid)


def deriv(f: GridField, order: int = 1) -> GridField:
    """Spectral derivative of order 1..4."""
    if order not in (1, 2, 3, 4):
        raise PreconditionError(f"derivative order must be 1..4, got {order}")
    return _wrap(f.grid.deriv_values(f.values, order), f.grid)


def antideriv_zero_mean(f: GridField, mean_tol: float | None = None) -> GridField:
    """Zero-mean periodic antiderivative.

    ``mean_tol`` is relative to ``max|f|`` (default 1e-8). The measured mean
    is always logged at debug level so drifting hierarchy stages show up
    before they trip the tolerance.
    """
    rel = DEFAULT_MEAN_TOL if mean_tol is None else mean_tol
    scale = float(np.max(np.abs(f.values)))
    mean = float(np.mean(f.values))
    log.debug("antiderivative integrand mean %.3e (scale %.3e)", mean, scale)
    if abs(mean) > rel * scale:
        raise IntegrabilityError(
            f"integrand mean {mean:.3e} exceeds {rel:.1e} x max|f| = {rel * scale:.3e}"
        )
    return _wrap(f.grid.antideriv_values(f.values), f.grid)


def dealias(f: GridField) -> GridField:
    return _wrap(f.grid.dealias_values(f.values), f.grid)


def sobolev_norm(f: GridField, s: int) -> float:
    if s not in range(5):
        raise PreconditionError(f"Sobolev index must be 0..4, got {s}")
    g = f.grid
    return float(np.sqrt(sum(g.l2_sq_values(f.values, j) for j in range(s + 1))))

"""Remainders of the expansion: extraction, norms, the remainder system, elliptic and symbol checks.

Notation at one instant (densities divided by n_bar):

    N = 1 + eps n~ + eps^3 n_R,   u = eps u~ + eps^3 u_R,   phi = eps phi^ + eps^3 phi_R

with ``n~ = sum_k eps^(k-1) n^(k)`` and likewise for ``u~``, ``phi^``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .eps_series import EpsSeries, ep_residual_series, series_inv1p, series_mul
from .errors import DomainError, ParameterError, ShapeError
from .euler_poisson import EpState, EpTrajectory
from .hierarchy import JetCascade, ProfileSet
from .params_grid import PRESETS, Grid, GridField, PhysParams

__all__ = [
    "RemainderState",
    "RemainderTrajectory",
    "NormReport",
    "assemble_expansion",
    "extract_remainder",
    "extract_trajectory",
    "norm_report",
    "ProfileSums",
    "b_engine",
    "b_reference",
    "r1_transcribed",
    "r1_engine",
    "r2_closed_form",
    "r2_engine",
    "r3_taylor",
    "r3_engine",
    "r3_a4_split",
    "r3_source",
    "taylor_tail",
    "coefficient_crosscheck",
    "remainder_system_residual",
    "ResidualTable",
    "EllipticRatios",
    "lemma31_check",
    "SymbolEigen",
    "symbol_eigen",
]

log = logging.getLogger(__name__)

AGREE_TOL = 1e-9


# --------------------------------------------------------------------------
# states and extraction
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class RemainderState:
    n_R: GridField
    u_R: GridField
    phi_R: GridField
    eps: float
    t: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.n_R.grid


def _profile_values(profiles_at_t):
    """Accept a ProfileSlice or a JetCascade and return value arrays (k = 1..m)."""
    if isinstance(profiles_at_t, JetCascade):
        profiles_at_t = profiles_at_t.slice(values_only=True)
    sl = profiles_at_t.values()
    return sl.n, sl.u, sl.phi, sl.grid


def assemble_expansion(profiles_at_t, remainder_or_zero: RemainderState | None, eps: float, params: PhysParams, t: float = 0.0) -> EpState:
    """``n = n_bar (1 + sum eps^k n^(k) + eps^3 n_R)``; u and phi without the leading 1."""
    ns, us, ps, grid = _profile_values(profiles_at_t)
    N = np.ones(grid.n_points)
    u = np.zeros(grid.n_points)
    phi = np.zeros(grid.n_points)
    for k, (a, b, c) in enumerate(zip(ns, us, ps), start=1):
        w = eps**k
        N, u, phi = N + w * a, u + w * b, phi + w * c
    if remainder_or_zero is not None:
        w = eps**3
        N = N + w * remainder_or_zero.n_R.values
        u = u + w * remainder_or_zero.u_R.values
        phi = phi + w * remainder_or_zero.phi_R.values
    return EpState(GridField(params.n_bar * N, grid), GridField(u, grid), GridField(phi, grid), t, eps)


def extract_remainder(ep_state: EpState, profiles_at_t, eps: float, params: PhysParams) -> RemainderState:
    if not eps > 0:
        raise ParameterError("eps must be positive to extract a remainder")
    ns, us, ps, grid = _profile_values(profiles_at_t)
    if ep_state.grid != grid:
        raise ShapeError("EP state and profiles live on different grids")
    rn = ep_state.n.values / params.n_bar - 1.0
    ru, rp = ep_state.u.values.copy(), ep_state.phi.values.copy()
    for k, (a, b, c) in enumerate(zip(ns, us, ps), start=1):
        w = eps**k
        rn, ru, rp = rn - w * a, ru - w * b, rp - w * c
    s = eps**-3
    return RemainderState(GridField(s * rn, grid), GridField(s * ru, grid), GridField(s * rp, grid), eps, ep_state.t)


@dataclass(frozen=True)
class RemainderTrajectory:
    """Remainders at the output times; optionally the EP densities/velocities they came from."""

    times: np.ndarray
    n_R: np.ndarray
    u_R: np.ndarray
    phi_R: np.ndarray
    eps: float
    grid: Grid
    ep_N: np.ndarray | None = field(default=None, repr=False)  # n / n_bar
    ep_u: np.ndarray | None = field(default=None, repr=False)

    def state(self, i: int) -> RemainderState:
        g = self.grid
        return RemainderState(GridField(self.n_R[i], g), GridField(self.u_R[i], g), GridField(self.phi_R[i], g), self.eps, float(self.times[i]))


def extract_trajectory(traj: EpTrajectory, profiles: ProfileSet, params: PhysParams) -> RemainderTrajectory:
    """Remainders at every EP output time (which must lie on the profile time grid)."""
    if traj.grid != profiles.grid:
        raise ShapeError("EP trajectory and profiles live on different grids")
    out = []
    for i, t in enumerate(traj.times):
        rem = extract_remainder(traj.state(i), profiles.slice(profiles.index_of(t)), traj.eps, params)
        out.append((rem.n_R.values, rem.u_R.values, rem.phi_R.values))
    arr = np.array(out)
    return RemainderTrajectory(
        np.array(traj.times), arr[:, 0], arr[:, 1], arr[:, 2], traj.eps, traj.grid,
        ep_N=np.asarray(traj.n) / params.n_bar, ep_u=np.array(traj.u),
    )


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class NormReport:
    h2_triple: float
    eps_norm: float
    components: dict
    t: float
    n_h2: float = 0.0

    @property
    def full_energy(self) -> float:
        """``sqrt(||n_R||_H2^2 + eps_norm^2)``: H2 of the triple plus the eps-weighted derivatives."""
        return math.sqrt(self.n_h2**2 + self.eps_norm**2)


def _h2_sq(v, grid):
    return float(sum(grid.l2_sq_values(v, j) for j in range(3)))


def norm_report(rem: RemainderState) -> NormReport:
    g, eps = rem.grid, rem.eps
    n, u, p = rem.n_R.values, rem.u_R.values, rem.phi_R.values
    comp = {
        "u_H2": _h2_sq(u, g),
        "phi_H2": _h2_sq(p, g),
        "eps_u3": eps * float(g.l2_sq_values(u, 3)),
        "eps_phi3": eps * float(g.l2_sq_values(p, 3)),
        "eps2_phi4": eps**2 * float(g.l2_sq_values(p, 4)),
    }
    n_h2 = math.sqrt(_h2_sq(n, g))
    h2 = math.sqrt(n_h2**2 + comp["u_H2"] + comp["phi_H2"])
    return NormReport(h2, math.sqrt(sum(comp.values())), comp, rem.t, n_h2)


# --------------------------------------------------------------------------
# coefficients of the remainder system
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ProfileSums:
    """Values (and first time derivatives) of the profiles at one instant."""

    n: list
    u: list
    phi: list
    n_t: list
    u_t: list
    grid: Grid

    @classmethod
    def from_cascade(cls, cas: JetCascade) -> "ProfileSums":
        if cas.n[0].shape[0] < 2:
            raise ShapeError("jets must carry at least the first time derivative")
        return cls(
            [j[0] for j in cas.n], [j[0] for j in cas.u], [j[0] for j in cas.phi],
            [j[1] for j in cas.n], [j[1] for j in cas.u], cas.grid,
        )

    def tilde(self, name: str, eps: float) -> np.ndarray:
        fields = getattr(self, name)
        return sum(eps ** (k - 1) * f for k, f in enumerate(fields, start=1))


def _series(fields, grid, K):
    return EpsSeries.from_fields(fields, grid, K=K, start=1)


def b_engine(ps: ProfileSums, K: int = 3, dealias: bool = False) -> list:
    """``b_k``, k = 0..K, with ``d_x n~ / (1 + eps n~) = sum_k eps^k b_k``."""
    g = ps.grid
    Nt = _series(ps.n, g, K + 1)
    dN = Nt.dx()
    logder = dN + series_mul(dN, series_inv1p(Nt, dealias), dealias)
    return [logder.coeffs[k + 1] for k in range(K + 1)]


def b_reference(ps: ProfileSums) -> list:
    """The four coefficients of b in their reference closed form (including the eps^2 bracket)."""
    g = ps.grid
    n1, n2, n3, n4 = ps.n
    d = lambda f: g.deriv_values(f, 1)
    return [
        d(n1),
        d(n2) - n1 * d(n1),
        d(n3) + (n1**2 - d(n1)) * d(n1) + n1 * d(n2),
        d(n4) - (d(n1 * n3) + (n2 - n1**2) * d(n2) + (n1**3 - 2 * n1 * n2) * d(n1)),
    ]


def _high_pairs(fa, fb, eps, op):
    out = 0.0
    for i, a in enumerate(fa, start=1):
        for j, b in enumerate(fb, start=1):
            if i + j >= 5:
                out = out + eps ** (i + j - 5) * op(a, b)
    return out


def r1_transcribed(ps: ProfileSums, eps: float) -> np.ndarray:
    g = ps.grid
    return ps.n_t[3] + _high_pairs(ps.n, ps.u, eps, lambda a, b: g.deriv_values(a * b, 1))


def r2_closed_form(ps: ProfileSums, eps: float, params: PhysParams, b_coeffs=None) -> np.ndarray:
    """``R_2`` with the temperature part ``(1/N~) [d n~ - N~ sum_{k<=3} eps^k b_k] / eps^4``.

    The bracket is a polynomial in eps whose coefficients below eps^4 cancel;
    only its eps^4..eps^7 coefficients are formed, so nothing is lost to
    cancellation. ``b_coeffs`` defaults to the engine coefficients.
    """
    g = ps.grid
    out = ps.u_t[3] + _high_pairs(ps.u, ps.u, eps, lambda a, b: a * g.deriv_values(b, 1))
    if params.T_i:
        b = b_engine(ps) if b_coeffs is None else b_coeffs
        poly = 0.0
        for m in range(4, 8):
            c = 0.0
            for j, nj in enumerate(ps.n, start=1):
                k = m - j
                if 0 <= k <= 3:
                    c = c - nj * b[k]
            poly = poly + eps ** (m - 4) * c
        Ntil = 1.0 + eps * ps.tilde("n", eps)
        out = out + (params.T_i / params.mass_M) * poly / Ntil
    return out


def _engine_sum(cas_values: ProfileSums, eps, params, which, K, dealias=False):
    g = cas_values.grid
    from .eps_series import ProfileSlice

    sl = ProfileSlice(tuple(cas_values.n), tuple(cas_values.u), tuple(cas_values.phi), g)
    sup = lambda var, k: {"n": cas_values.n_t, "u": cas_values.u_t}[var][k - 1]
    res = ep_residual_series(sl, sup, params, K=K, dealias=dealias)
    s = getattr(res, which)
    return sum(eps ** (k - 5) * s.coeffs[k] for k in range(5, K + 1))


def r1_engine(ps: ProfileSums, eps: float, params: PhysParams) -> np.ndarray:
    """``sum_{k>=5} eps^(k-5) (mass residual)_k``; the sum is finite (k <= 8)."""
    return _engine_sum(ps, eps, params, "mass", 8)


def r2_engine(ps: ProfileSums, eps: float, params: PhysParams, K: int | None = None) -> np.ndarray:
    """Engine momentum residual summed from order 5; exact at K = 8 when T_i = 0."""
    if K is None:
        K = 8 if params.T_i == 0 else 28
    return _engine_sum(ps, eps, params, "momentum", K)


_GL_X, _GL_W = leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def taylor_tail(z: np.ndarray) -> np.ndarray:
    """``exp(z) - sum_{j<=4} z^j/j!`` as ``(1/4!) int_0^1 e^(theta z) (1-theta)^4 z^5 dtheta``."""
    z = np.asarray(z, dtype=float)
    integrand = np.exp(np.multiply.outer(_GL_X, z)) * ((1.0 - _GL_X) ** 4)[:, None] if z.ndim else None
    if z.ndim == 0:
        return float(np.sum(_GL_W * np.exp(_GL_X * z) * (1.0 - _GL_X) ** 4) * z**5 / 24.0)
    return np.tensordot(_GL_W, integrand, axes=1) * z**5 / 24.0


def r3_taylor(phi_R, ps: ProfileSums, eps: float, params: PhysParams) -> np.ndarray:
    """``R_3`` from the binomially expanded degree-4 Taylor polynomial plus the integral tail.

    Every retained term carries at least one factor of ``phi_R``; the two
    lowest ones are cancelled by the linear terms kept on the left of the
    Poisson remainder equation.
    """
    k = params.kappa
    phr = np.asarray(phi_R, dtype=float)
    phat = ps.tilde("phi", eps)
    # (phi^ - phi^(1)) / eps, formed without division
    phat_shift = sum(eps ** (j - 2) * f for j, f in enumerate(ps.phi, start=1) if j >= 2)
    total = k**2 * phat_shift * phr
    for j in range(2, 5):
        for i in range(1, j + 1):
            if (j, i) == (2, 1):
                continue
            coef = k**j / math.factorial(j) * math.comb(j, i)
            total = total + coef * eps ** (j + 2 * i - 5) * phat ** (j - i) * phr**i
    Y = k * eps * phat
    X = Y + k * eps**3 * phr
    total = total + (taylor_tail(X) - taylor_tail(Y)) / eps**5
    return params.poisson_scale * total


def r3_engine(phi_R, ps: ProfileSums, eps: float, params: PhysParams) -> np.ndarray:
    """Closed form ``S [e^Y expm1(Z)/eps^3 - kappa phi_R - eps kappa^2 phi^(1) phi_R] / eps^2``."""
    k = params.kappa
    phr = np.asarray(phi_R, dtype=float)
    Y = k * eps * ps.tilde("phi", eps)
    Z = k * eps**3 * phr
    inner = np.exp(Y) * np.expm1(Z) / eps**3 - k * phr - eps * k**2 * ps.phi[0] * phr
    return params.poisson_scale * inner / eps**2


def r3_a4_split(phi_R, ps: ProfileSums, eps: float, params: PhysParams):
    """``R_3 / S = [k^2 eps phi_R / 2 + k^2 (phi2 + k phi1^2 / 2)] phi_R + R'``; returns (bracket term, R')."""
    k = params.kappa
    phr = np.asarray(phi_R, dtype=float)
    lead = (0.5 * k**2 * eps * phr + k**2 * (ps.phi[1] + 0.5 * k * ps.phi[0] ** 2)) * phr
    return lead, r3_taylor(phr, ps, eps, params) / params.poisson_scale - lead


def r3_source(ps: ProfileSums, eps: float, params: PhysParams) -> np.ndarray:
    """Profile-only Poisson defect ``[S(e^Y - 1 - eps n~) - eps^2 phi^''] / eps^5``.

    It does not involve the remainder, so it is not part of ``R_3`` proper,
    but the Poisson remainder equation is only an identity with it included.
    The Taylor polynomial of degree 4 in ``Y`` is expanded exactly in eps
    (orders 5..16); orders <= 4 vanish by the profile relations.
    """
    g = ps.grid
    K = 16
    Yser = _series([params.kappa * f for f in ps.phi], g, K)
    poly = EpsSeries.one(K, g)
    power = EpsSeries.one(K, g)
    for j in range(1, 5):
        power = series_mul(power, Yser, dealias=False)
        poly = poly + (1.0 / math.factorial(j)) * power
    acc = sum(eps ** (m - 5) * poly.coeffs[m] for m in range(5, K + 1))
    Y = params.kappa * eps * ps.tilde("phi", eps)
    acc = acc + taylor_tail(Y) / eps**5
    return params.poisson_scale * acc - g.deriv_values(ps.phi[3], 2)


def coefficient_crosscheck(ps: ProfileSums, eps: float, params: PhysParams, phi_R=None) -> dict:
    """Compare reference coefficient formulas with engine values.

    ``R2_reference_b`` feeds the reference b coefficients into the temperature
    part of ``R_2``; with ``T_i = 0`` it coincides with ``R2``.

    Returns ``{name: max abs difference}`` and logs a discrepancy report for
    each entry above the agreement tolerance; engine values are the ones
    used downstream.
    """
    out = {}
    be = b_engine(ps)
    bp = b_reference(ps)
    for k in range(4):
        out[f"b_{k}"] = float(np.max(np.abs(be[k] - bp[k])))
    out["R1"] = float(np.max(np.abs(r1_transcribed(ps, eps) - r1_engine(ps, eps, params))))
    r2e = r2_engine(ps, eps, params)
    out["R2"] = float(np.max(np.abs(r2_closed_form(ps, eps, params) - r2e)))
    out["R2_reference_b"] = float(np.max(np.abs(r2_closed_form(ps, eps, params, b_coeffs=bp) - r2e)))
    if phi_R is not None:
        out["R3"] = float(np.max(np.abs(r3_taylor(phi_R, ps, eps, params) - r3_engine(phi_R, ps, eps, params))))
    for name, diff in out.items():
        if diff > AGREE_TOL:
            log.warning("coefficient discrepancy: reference %s differs from engine by %.3e; engine value used", name, diff)
    return out


# --------------------------------------------------------------------------
# the remainder system as an identity
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ResidualTable:
    times: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    poisson: np.ndarray

    def max(self) -> dict:
        return {k: float(np.max(getattr(self, k))) if len(self.times) else 0.0 for k in ("mass", "momentum", "poisson")}


def _fd4(arr: np.ndarray, i: int, dt: float) -> np.ndarray:
    return (arr[i - 2] - 8 * arr[i - 1] + 8 * arr[i + 1] - arr[i + 2]) / (12.0 * dt)


def remainder_system_residual(
    rem_traj: RemainderTrajectory, profiles: ProfileSet, eps: float, params: PhysParams, band: str = "retained"
) -> ResidualTable:
    """L2 norms of the three remainder equations at interior output times.

    Time derivatives of the remainder come from 4th-order centred
    differences on the stored (uniform) time grid. When the trajectory
    carries the EP fields, only those are differenced and the profile part
    uses the exact profile time derivatives: the profiles oscillate at the
    dispersive rate ``delta k^3`` at high wavenumber, which an output grid
    sized for the EP solution does not resolve.

    ``band`` works as in :func:`epkdv.hierarchy.profile_residuals`: the
    default measures the 2/3 band, ``"full"`` also counts the upper third,
    where the high-order profile terms leave a dt-independent round-off
    floor near 1e-7.
    """
    if band not in ("retained", "full"):
        raise ValueError(f"band must be 'retained' or 'full', got {band!r}")
    if rem_traj.grid != profiles.grid:
        raise ShapeError("remainder trajectory and profiles live on different grids")
    if abs(rem_traj.eps - eps) > 1e-15:
        raise ShapeError("remainder trajectory was extracted at a different eps")
    times = np.asarray(rem_traj.times)
    if len(times) < 5:
        raise ShapeError("at least five output times are needed for centred differences")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise ShapeError("remainder output times must be uniform")
    idx = [profiles.index_of(t) for t in times]
    g, p = rem_traj.grid, params
    d = lambda f, m=1: g.deriv_values(f, m)
    V, S, k = p.V, p.poisson_scale, p.kappa
    rows = []
    for i in range(2, len(times) - 2):
        ps = ProfileSums.from_cascade(profiles.cascade(idx[i], J=4))
        nR, uR, phR = rem_traj.n_R[i], rem_traj.u_R[i], rem_traj.phi_R[i]
        nt = ps.tilde("n", eps)
        ut = ps.tilde("u", eps)
        Ntil = 1.0 + eps * nt
        N = Ntil + eps**3 * nR
        u = eps * ut + eps**3 * uR
        b = d(nt) / Ntil
        if rem_traj.ep_N is not None:
            w = [eps ** (k - 3) for k in range(1, len(ps.n) + 1)]
            dtn = (_fd4(rem_traj.ep_N, i, steps[0]) / eps**3 - sum(a * f for a, f in zip(w, ps.n_t)))
            dtu = (_fd4(rem_traj.ep_u, i, steps[0]) / eps**3 - sum(a * f for a, f in zip(w, ps.u_t)))
        else:
            dtn, dtu = _fd4(rem_traj.n_R, i, steps[0]), _fd4(rem_traj.u_R, i, steps[0])
        res_a = (
            dtn
            - (V - u) / eps * d(nR)
            + N / eps * d(uR)
            + d(nt) * uR
            + d(ut) * nR
            + eps * r1_engine(ps, eps, p)
        )
        res_b = (
            dtu
            - (V - u) / eps * d(uR)
            + (p.T_i / p.mass_M) * (d(nR) / eps - (nt + eps**2 * nR) / N * d(nR) - b / N * nR)
            + d(ut) * uR
            + eps * r2_closed_form(ps, eps, p)
            + (p.e_charge / p.mass_M) / eps * d(phR)
        )
        res_c = (
            eps * d(phR, 2)
            - S * (k * phR + eps * k**2 * ps.phi[0] * phR - nR)
            - eps**2 * (r3_taylor(phR, ps, eps, p) + r3_source(ps, eps, p))
        )
        parts = (res_a, res_b, res_c)
        if band == "retained":
            parts = [g.dealias_values(r) for r in parts]
        rows.append([math.sqrt(g.l2_sq_values(r)) for r in parts])
    rows = np.array(rows).reshape(-1, 3)
    return ResidualTable(times[2:-2], rows[:, 0], rows[:, 1], rows[:, 2])


# --------------------------------------------------------------------------
# two-sided elliptic estimate
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class EllipticRatios:
    ratio_low: float
    ratio_high: float
    degenerate: bool

    def within(self, C1: float) -> bool:
        return not self.degenerate and self.ratio_low <= C1 and self.ratio_high <= C1


def lemma31_check(rem: RemainderState, alpha: int) -> EllipticRatios:
    """Ratios of ``||d^a phi||^2 + eps||d^(a+1) phi||^2 + eps^2||d^(a+2) phi||^2`` and ``||d^a n||^2``."""
    if alpha not in (0, 1, 2):
        raise ParameterError("alpha must be 0, 1 or 2")
    g, eps = rem.grid, rem.eps
    phi = rem.phi_R.values
    middle = sum(eps**j * float(g.l2_sq_values(phi, alpha + j)) for j in range(3))
    base = float(g.l2_sq_values(rem.n_R.values, alpha))
    if base == 0.0 or middle == 0.0:
        low = math.inf if base == 0.0 and middle > 0 else (0.0 if base > 0 else math.nan)
        high = math.inf if middle == 0.0 and base > 0 else (0.0 if middle > 0 else math.nan)
        return EllipticRatios(low, high, True)
    return EllipticRatios(middle / base, base / middle, False)


# --------------------------------------------------------------------------
# frozen-coefficient symbol
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class SymbolEigen:
    lam_plus: complex
    lam_minus: complex
    A: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    reconstruction_error: float
    P_inv_reference: np.ndarray = field(repr=False, default=None)


def _is_warm(p: PhysParams) -> bool:
    w = PRESETS["warm"]
    return all(math.isclose(getattr(p, f), getattr(w, f), rel_tol=1e-14) for f in ("e_charge", "mass_M", "T_i", "T_e", "n_bar"))


def symbol_eigen(point_values, xi: float, eps: float, params: PhysParams = PRESETS["warm"], frame_speed: float | None = None) -> SymbolEigen:
    """Eigen-decomposition of the frozen-coefficient symbol of the remainder system.

    ``point_values = (N_R, U_R)`` or ``(N_R, U_R, phi1)``. The diagonal uses
    the frame speed ``V`` of the parameters (pass ``frame_speed=1`` to get
    the matrix with unit frame speed).
    """
    if not _is_warm(params):
        raise ParameterError("the symbol is defined in the warm normalization only")
    N_R, U_R, *rest = point_values
    phi1 = rest[0] if rest else 0.0
    V = params.V if frame_speed is None else frame_speed
    n1 = 1.0 + eps * N_R
    n2 = 1.0 + eps * phi1 + eps * xi**2
    if n1 <= 0 or n2 <= 0:
        raise DomainError(f"symbol needs n1 > 0 and n2 > 0 (n1={n1}, n2={n2})")
    diag = U_R - V / eps
    A = 1j * xi * np.array([[diag, n1 / eps], [1.0 / (eps * n1) + 1.0 / (eps * n2), diag]])
    root = math.sqrt(n1 + n2) / (eps * math.sqrt(n2))
    lp, lm = 1j * xi * (diag + root), 1j * xi * (diag - root)
    a, b = n1 * math.sqrt(n2), math.sqrt(n1 + n2)
    S = math.sqrt(n1**2 * n2 + n2 + n1)
    P = np.array([[a, a], [b, -b]]) / S
    P_inv = 0.5 * np.array([[S / a, S / b], [S / a, -S / b]])
    P_inv_reference = 0.5 * np.array([[S / a, S / b], [a / S, -S / b]])
    err = float(np.max(np.abs(A - P @ np.diag([lp, lm]) @ P_inv)))
    return SymbolEigen(lp, lm, A, P, P_inv, err, P_inv_reference)

"""The four-profile expansion hierarchy.

Profile ``k`` obeys a (linearized) KdV equation whose forcing involves time
derivatives of the lower profiles, nested up to order ``k - 1``.  Those are
obtained exactly by carrying every field as a time-Taylor jet (see
``eps_series``): the jet of ``n^(k)`` follows from its own evolution
equation by the recursion ``c_{m+1} = rhs_m / (m + 1)``.  Closure terms
``h, g, G`` are then read off the residual engine with the unknown profile
set to zero, so no order-specific formula is transcribed here.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eps_series import ProfileSlice, ep_residual_series, jet_dt
from .errors import HierarchyError, IntegrabilityError, ShapeError
from .kdv_solvers import ETDRK4, _check_finite, _kdv_linear_symbol, step_schedule
from .params_grid import Grid, GridField, PhysParams
from .spectral_ops import DEFAULT_MEAN_TOL

__all__ = [
    "first_profile",
    "JetCascade",
    "jet_cascade",
    "extract_forcings",
    "ProfileSet",
    "build_profiles",
    "profile_residuals",
    "SignResolution",
    "resolve_flux_sign",
]

log = logging.getLogger(__name__)

N_PROFILES = 4


def first_profile(n1: GridField, params: PhysParams) -> tuple[GridField, GridField]:
    """Velocity and potential slaved to the first density profile."""
    return n1 * params.V, n1 * (1.0 / params.kappa)


@dataclass
class JetCascade:
    """Jets of all profiles at one instant plus the closure terms per level.

    ``n[k-1]`` is the jet of ``n^(k)``; ``h[k]``, ``g[k]``, ``G[k]`` are the
    jets of the level-k closure terms ``h^(k-1)``, ``g^(k-1)``, ``G^(k-1)``.
    """

    n: list
    u: list
    phi: list
    h: dict = field(default_factory=dict)
    g: dict = field(default_factory=dict)
    G: dict = field(default_factory=dict)
    grid: Grid | None = None

    def dt_supplier(self):
        def supply(var, k):
            src = {"n": self.n, "u": self.u}[var]
            return jet_dt(src[k - 1])

        return supply

    def slice(self, values_only: bool = False) -> ProfileSlice:
        s = ProfileSlice(tuple(self.n), tuple(self.u), tuple(self.phi), self.grid)
        return s.values() if values_only else s


def _antideriv_rows(rows: np.ndarray, grid: Grid, mean_tol: float, level: int) -> np.ndarray:
    means = rows.mean(axis=-1)
    scale = np.max(np.abs(rows), axis=-1)
    log.debug("level %d mass-residual means %s", level, np.array2string(means, precision=2))
    bad = np.abs(means) > mean_tol * scale
    if bad[0]:
        # only the instantaneous row is certain to be meaningful; jet rows
        # beyond the valid order may carry truncation garbage
        raise HierarchyError(
            f"level {level}: mass residual has mean {means[0]:.3e} (scale {scale[0]:.3e}); "
            "the forcing would not decay"
        )
    return grid.antideriv_values(rows)


def _level_forcings(k, n, u, phi, params: PhysParams, grid: Grid, mean_tol: float):
    """Closure terms ``(h, g, G)`` of level k from lower-level jets."""
    zero = np.zeros_like(n[0])
    lower_n, lower_u, lower_phi = list(n[: k - 1]), list(u[: k - 1]), list(phi[: k - 1])

    def supplier_with(top_u_dt):
        def supply(var, j):
            if j < k:
                return jet_dt((lower_n if var == "n" else lower_u)[j - 1])
            if j == k:
                return zero if var == "n" else top_u_dt
            raise KeyError(j)

        return supply

    sl = ProfileSlice(tuple(lower_n + [zero]), tuple(lower_u + [zero]), tuple(lower_phi + [zero]), grid)
    res = ep_residual_series(sl, supplier_with(zero), params, K=k)
    h = res.poisson.coeffs[k] / params.poisson_scale
    g = -_antideriv_rows(res.mass.coeffs[k], grid, mean_tol, k)

    sl2 = ProfileSlice(
        tuple(lower_n + [zero]), tuple(lower_u + [g]), tuple(lower_phi + [h / params.kappa]), grid
    )
    res2 = ep_residual_series(sl2, supplier_with(jet_dt(g)), params, K=k + 1)
    V = params.V
    combo = (
        V * res2.mass.coeffs[k + 1]
        + res2.momentum.coeffs[k + 1]
        + params.poisson_coupling * grid.deriv_values(res2.poisson.coeffs[k + 1], 1)
    )
    # G carries up to a dozen derivatives of lower profiles; round-off in the
    # upper third of the spectrum is amplified far past the signal there, so
    # the forcing is projected onto the retained band like a nonlinear term
    G = grid.dealias_values(-combo / (2.0 * V))
    return h, g, G


def _flux(grid: Grid, prod: np.ndarray) -> np.ndarray:
    return grid.deriv_values(grid.dealias_values(prod), 1)


def _taylor_jet(value, grid, params, J, n1_jet=None, forcing=None):
    """Jet of a profile from its evolution equation, row by row."""
    jet = np.zeros((J + 1, grid.n_points))
    jet[0] = value
    V, delta = params.V, params.delta
    for m in range(J):
        if n1_jet is None:
            prod = sum(jet[p] * jet[m - p] for p in range(m + 1))
            rhs = -0.5 * V * _flux(grid, prod)
        else:
            prod = sum(n1_jet[p] * jet[m - p] for p in range(m + 1))
            rhs = forcing[m] - V * _flux(grid, prod)
        rhs = rhs - delta * grid.deriv_values(jet[m], 3)
        jet[m + 1] = rhs / (m + 1)
    return jet


def jet_cascade(
    n_values,
    params: PhysParams,
    grid: Grid,
    J: int | None = None,
    next_level: bool = False,
    mean_tol: float = DEFAULT_MEAN_TOL,
) -> JetCascade:
    """Jets of profiles ``1..m`` given their instantaneous densities.

    With ``J = m`` (the default) every jet is valid at least through its
    first time derivative, which is what the order-(m+1) residual needs.
    ``next_level`` also extracts the closure terms of level ``m + 1``; the
    forcing ``G`` of level k reads jets of depth k, so J is raised to at
    least ``m + 1`` in that case.
    """
    vals = [np.asarray(v, dtype=float) for v in n_values]
    m = len(vals)
    if m == 0:
        raise HierarchyError("at least the first profile is required")
    J = max(m, 1) if J is None else J
    if next_level:
        J = max(J, m + 1)
    kappa, V = params.kappa, params.V
    cas = JetCascade([], [], [], grid=grid)
    for k in range(1, m + 1):
        if k == 1:
            jet = _taylor_jet(vals[0], grid, params, J)
            cas.n.append(jet)
            cas.u.append(V * jet)
            cas.phi.append(jet / kappa)
            continue
        h, g, G = _level_forcings(k, cas.n, cas.u, cas.phi, params, grid, mean_tol)
        cas.h[k], cas.g[k], cas.G[k] = h, g, G
        jet = _taylor_jet(vals[k - 1], grid, params, J, n1_jet=cas.n[0], forcing=G)
        cas.n.append(jet)
        cas.u.append(V * jet + g)
        cas.phi.append((jet + h) / kappa)
    if next_level:
        k = m + 1
        cas.h[k], cas.g[k], cas.G[k] = _level_forcings(k, cas.n, cas.u, cas.phi, params, grid, mean_tol)
    return cas


def extract_forcings(k: int, lower_profiles_at_t, params: PhysParams, mean_tol: float = DEFAULT_MEAN_TOL):
    """``(h^(k-1), g^(k-1), G^(k-1))`` from the densities ``n^(1..k-1)`` at one time.

    Lower velocities and potentials are implied by the closure relations;
    their time derivatives come from the profile evolution equations.
    """
    lower = list(lower_profiles_at_t)
    if k < 2 or len(lower) < k - 1:
        raise HierarchyError(f"level {k} needs densities of profiles 1..{k - 1}")
    grid = lower[0].grid
    cas = jet_cascade([np.asarray(f) for f in lower[: k - 1]], params, grid, J=k, next_level=True, mean_tol=mean_tol)
    h, g, G = cas.h[k], cas.g[k], cas.G[k]
    return GridField(h[0], grid), GridField(g[0], grid), GridField(G[0], grid)


@dataclass(frozen=True)
class ProfileSet:
    """Profiles on a uniform time grid.

    Arrays are indexed ``[k-1, time, x]``; closure terms ``h, g, G`` are
    indexed ``[k-2, time, x]`` for levels k = 2..4.
    """

    times: np.ndarray
    n: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    h: np.ndarray
    g: np.ndarray
    G: np.ndarray
    params: PhysParams
    grid: Grid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nt = len(self.times)
        for name in ("n", "u", "phi"):
            if getattr(self, name).shape != (N_PROFILES, nt, self.grid.n_points):
                raise ShapeError(f"{name} has shape {getattr(self, name).shape}")
        for name in ("h", "g", "G"):
            if getattr(self, name).shape != (N_PROFILES - 1, nt, self.grid.n_points):
                raise ShapeError(f"{name} has shape {getattr(self, name).shape}")

    @property
    def n_times(self) -> int:
        return len(self.times)

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ShapeError(f"time {t} is not on the profile output grid")
        return i

    def slice(self, i: int) -> ProfileSlice:
        return ProfileSlice(tuple(self.n[:, i]), tuple(self.u[:, i]), tuple(self.phi[:, i]), self.grid)

    def cascade(self, i: int, J: int = N_PROFILES) -> JetCascade:
        """Jets at stored time index ``i`` (recomputed from the densities)."""
        return jet_cascade(list(self.n[:, i]), self.params, self.grid, J=J)


def _stage_rhs_factory(grid: Grid, params: PhysParams, mean_tol: float):
    V = params.V
    kmask = 1j * grid.k_eff * grid.keep_mask

    def nonlin(t, vh):
        v = grid.ifft(vh)
        m = v.shape[0]
        cas = jet_cascade(list(v[: m - 1]), params, grid, J=m, next_level=True, mean_tol=mean_tol)
        out = np.empty_like(vh)
        out[0] = -0.5 * V * kmask * grid.fft(v[0] * v[0])
        for k in range(2, m + 1):
            out[k - 1] = grid.fft(cas.G[k][0]) - V * kmask * grid.fft(v[0] * v[k - 1])
        return out

    return nonlin


def build_profiles(
    n_init,
    tau: float,
    params: PhysParams,
    dt: float,
    out_every: int = 1,
    mean_tol: float = DEFAULT_MEAN_TOL,
    resolve_sign: bool = True,
) -> ProfileSet:
    """Integrate the four profile equations together and record closures.

    All four densities advance in one ETDRK4 state so that every forcing is
    evaluated at the exact stage values of the lower profiles; row k of
    the update never reads rows above k.
    """
    fields = list(n_init)
    if len(fields) != N_PROFILES:
        raise HierarchyError(f"expected {N_PROFILES} initial densities, got {len(fields)}")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ShapeError("initial densities live on different grids")
    v0 = np.array([f.values for f in fields])

    meta = {"dt": None}
    if resolve_sign:
        res = resolve_flux_sign(fields[0], params)
        meta["flux_sign"] = res.selected
        log.info("%s", res.message)

    n_steps, h = step_schedule(tau, dt, out_every)
    meta["dt"] = h
    stepper = ETDRK4(_kdv_linear_symbol(grid, params), h)
    nonlin = _stage_rhs_factory(grid, params, mean_tol)

    snaps_t, snaps = [0.0], [v0.copy()]
    vh = grid.fft(v0)
    for s in range(1, n_steps + 1):
        vh = stepper.step(vh, (s - 1) * h, nonlin)
        if s % out_every == 0:
            v = grid.ifft(vh)
            _check_finite(v, s * h)
            snaps_t.append(s * h)
            snaps.append(v)

    nt = len(snaps)
    N = grid.n_points
    n = np.transpose(np.array(snaps), (1, 0, 2))
    u = np.zeros((N_PROFILES, nt, N))
    phi = np.zeros_like(u)
    hh = np.zeros((N_PROFILES - 1, nt, N))
    gg, GG = np.zeros_like(hh), np.zeros_like(hh)
    for i in range(nt):
        cas = jet_cascade(list(n[:, i]), params, grid, J=N_PROFILES, mean_tol=mean_tol)
        for k in range(1, N_PROFILES + 1):
            u[k - 1, i] = cas.u[k - 1][0]
            phi[k - 1, i] = cas.phi[k - 1][0]
            if k >= 2:
                hh[k - 2, i], gg[k - 2, i], GG[k - 2, i] = cas.h[k][0], cas.g[k][0], cas.G[k][0]
    return ProfileSet(np.array(snaps_t), n, u, phi, hh, gg, GG, params, grid, meta)


def _scale(fields, grid) -> float:
    return max((float(np.sqrt(sum(grid.l2_sq_values(f, j) for j in range(4)))) for f in fields), default=0.0)


def profile_residuals(
    cas: JetCascade, params: PhysParams, orders=range(1, N_PROFILES + 1), band: str = "retained"
) -> dict:
    """Relative L2 norms of the engine residual coefficients.

    Returns ``{(equation, k): value}`` with equation in mass/momentum/poisson.
    The reference scale is the largest H^3 norm among profiles ``1..k``.

    ``band="retained"`` measures the coefficient on the 2/3 band that every
    nonlinear product is projected onto; ``band="full"`` keeps the upper
    third, which at high order holds only amplified round-off (it grows with
    the grid size rather than shrinking).
    """
    if band not in ("retained", "full"):
        raise ValueError(f"band must be 'retained' or 'full', got {band!r}")
    grid = cas.grid
    orders = list(orders)
    K = max(orders)
    res = ep_residual_series(cas.slice(), cas.dt_supplier(), params, K=K)
    out = {}
    for k in orders:
        scale = _scale([cas.n[j][0] for j in range(min(k, len(cas.n)))], grid) or 1.0
        for name, s in zip(("mass", "momentum", "poisson"), res):
            c = s.coeffs[k]
            c0 = c[0] if c.ndim == 2 else c
            if band == "retained":
                c0 = grid.dealias_values(c0)
            out[(name, k)] = float(np.sqrt(grid.l2_sq_values(c0))) / scale
    return out


@dataclass(frozen=True)
class SignResolution:
    selected: str  # "-", "+" or "undetermined"
    residuals: dict
    tol: float

    @property
    def message(self) -> str:
        r = ", ".join(f"'{s}': {v:.2e}" for s, v in self.residuals.items())
        if self.selected == "undetermined":
            return f"g(1) flux sign undetermined: first profile is trivial (residuals {r})"
        reference = "+"
        verdict = "matches" if self.selected == reference else "differs from"
        return (
            f"g(1) flux sign resolved: g = -d_t n1 {self.selected} d_x(n1 u1) "
            f"({verdict} the reference '{reference}'; order<=2 residuals {r}, tol {self.tol:.0e})"
        )


def resolve_flux_sign(n1: GridField, params: PhysParams, tol: float = 1e-8) -> SignResolution:
    """Decide the sign in ``g^(1) = -d_t n1 (+/-) d_x(n1 u1)`` by the residual test.

    For each candidate, ``u^(2) = V n^(2) + antideriv(g)`` is inserted (with
    ``n^(2) = 0`` and ``phi^(2)`` from the Poisson closure) and the engine
    residuals of orders 1 and 2 are measured. Exactly one candidate must
    pass; a trivial first profile leaves the sign undetermined.
    """
    grid = n1.grid
    cas = jet_cascade([n1.values], params, grid, J=1, next_level=True)
    n1j, u1j = cas.n[0], cas.u[0]
    h1 = cas.h[2]
    flux = _flux(grid, n1j[0] * u1j[0])  # dealiased like every product in the engine
    dtn1 = jet_dt(n1j)[0]
    scale = _scale([n1.values], grid)
    residuals = {}
    for sign, s in (("+", 1.0), ("-", -1.0)):
        gbold = -dtn1 + s * flux
        try:
            g1 = grid.antideriv_values(gbold)
        except IntegrabilityError:  # pragma: no cover - mean is structurally zero
            residuals[sign] = np.inf
            continue
        zero = np.zeros(grid.n_points)
        sl = ProfileSlice(
            (n1j[0], zero), (u1j[0], g1), (n1j[0] / params.kappa, h1[0] / params.kappa), grid
        )
        supply = lambda var, k: {"n": dtn1, "u": params.V * dtn1}[var]
        res = ep_residual_series(sl, supply, params, K=2)
        worst = max(float(np.sqrt(grid.l2_sq_values(s_.coeffs[k]))) for s_ in res for k in (1, 2))
        residuals[sign] = worst / scale if scale > 0 else worst
    passing = [s for s, r in residuals.items() if r <= tol]
    if scale == 0:
        return SignResolution("undetermined", residuals, tol)
    if len(passing) != 1:
        raise HierarchyError(f"flux-sign arbitration is not unique: residuals {residuals}")
    return SignResolution(passing[0], residuals, tol)

"""Every scalar the regularity argument tracks, computed on stored runs.

Densities and energies live on (t, r) slices with area element
2 pi r e^beta dr and spacetime element r e^{beta+alpha} dr dt.  Cone
quantities integrate over the causal past of an apex on the axis; the
mantle is located by integrating the ingoing characteristic dr/dt =
-e^{alpha-beta} backward from the apex rather than by the flat-case
straight line.  Frame derivatives are written (T f) = e^{-alpha} f_t and
(R f) = e^{-beta} f_r throughout; null combinations use
f_v = (Tf + Rf)/2 and f_u = (Tf - Rf)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cauchy import BOUNDARY_MARGIN, CauchyRun, residual_evolution_2_13, residual_momentum
from .core import CauchyState, RadialGrid
from .errors import ConeOutOfRangeError
from .initial_data import d_dr
from .nullev import NullRun, residual_raychaudhuri

LOG_FLOOR = 1e-14


@dataclass
class Densities:
    e: np.ndarray
    m_dens: np.ndarray
    f: np.ndarray
    e_kin: np.ndarray


def densities(state: CauchyState, mass_m: float) -> Densities:
    """Pointwise energy/momentum/potential/kinetic densities on a slice."""
    dr = state.grid.spacing
    alpha = state.interior("alpha")
    beta = state.interior("beta")
    gamma = state.interior("gamma")
    g_t = state.interior("gamma_t")
    p_t = state.interior("phi_t")
    g_r = d_dr(gamma, dr)
    p_r = d_dr(state.interior("phi"), dr)
    e2a = np.exp(-2.0 * alpha)
    e2b = np.exp(-2.0 * beta)
    f = mass_m**2 * np.exp(-2.0 * gamma) * state.interior("phi") ** 2
    e = (e2a * g_t**2 + e2b * g_r**2 + 0.5 * e2a * p_t**2
         + 0.5 * e2b * p_r**2 + 0.5 * f)
    m_dens = np.exp(-alpha - beta) * (2.0 * g_t * g_r + p_t * p_r)
    e_kin = 0.5 * e2a * (2.0 * g_t**2 + p_t**2)
    return Densities(e=e, m_dens=m_dens, f=f, e_kin=e_kin)


def _partial_cell_sum(weights: np.ndarray, grid: RadialGrid, up_to_r: float | None) -> float:
    """Composite midpoint quadrature of cell-centered weights up to radius up_to_r."""
    dr = grid.spacing
    if up_to_r is None or up_to_r >= grid.r_max:
        return float(np.sum(weights) * dr)
    c = max(0.0, up_to_r / dr)
    nfull = min(int(c), grid.n_cells)
    out = float(np.sum(weights[:nfull]) * dr)
    if nfull < grid.n_cells:
        out += (c - nfull) * dr * weights[nfull]
    return out


def energy(state: CauchyState, mass_m: float, up_to_r: float | None = None) -> float:
    """E(t, r) = 2 pi int_0^r e r' e^beta dr' (total energy when r is omitted)."""
    dens = densities(state, mass_m)
    w = 2.0 * np.pi * dens.e * state.grid.centers * np.exp(state.interior("beta"))
    return _partial_cell_sum(w, state.grid, up_to_r)


@dataclass
class ConeSpec:
    """Backward cone of an axis apex, with mantle radii traced per slice time."""

    apex_time: float
    cone_fraction: float
    times: np.ndarray
    r2: np.ndarray
    apex_radius: float = 0.0

    def r2_of_t(self, t):
        return np.interp(t, self.times, self.r2)

    def r1_of_t(self, t):
        return self.cone_fraction * self.r2_of_t(t)


def trace_cone(run: CauchyRun, apex_time: float | None = None,
               cone_fraction: float | None = None) -> ConeSpec:
    """Locate the cone mantle by backward characteristic integration from the apex.

    dr/dt = -e^{alpha-beta} along the ingoing ray; between the last snapshot
    and the apex the last stored profile is used (the metric is frozen there
    at its small, slowly varying values).
    """
    cfg = run.config
    apex = cfg.resolved_apex_time() if apex_time is None else apex_time
    frac = cfg.cone_fraction if cone_fraction is None else cone_fraction
    times = run.times
    if apex <= times[0]:
        raise ConeOutOfRangeError("apex before the start of the run")
    centers = run.grid.centers

    def speed(profile_a, profile_b, r):
        return math.exp(np.interp(r, centers, profile_a - profile_b))

    r2 = np.zeros(len(times))
    r = 0.0
    t = apex
    last = run.snapshots[-1]
    # from the apex back to the final snapshot with the frozen last profile
    n_sub = max(1, int(math.ceil((apex - times[-1]) / run.snapshot_dt * 2)))
    dt_sub = (apex - times[-1]) / n_sub if n_sub else 0.0
    a_last, b_last = last.interior("alpha"), last.interior("beta")
    for _ in range(n_sub):
        k1 = speed(a_last, b_last, r)
        k2 = speed(a_last, b_last, r + 0.5 * dt_sub * k1)
        r += dt_sub * k2
        t -= dt_sub
    r2[-1] = r
    for i in range(len(times) - 2, -1, -1):
        s_hi, s_lo = run.snapshots[i + 1], run.snapshots[i]
        dt = times[i + 1] - times[i]
        a_mid = 0.5 * (s_hi.interior("alpha") + s_lo.interior("alpha"))
        b_mid = 0.5 * (s_hi.interior("beta") + s_lo.interior("beta"))
        k1 = speed(s_hi.interior("alpha"), s_hi.interior("beta"), r)
        k2 = speed(a_mid, b_mid, r + 0.5 * dt * k1)
        r += dt * k2
        r2[i] = r
    if np.any(r2 > run.grid.r_max - 2 * run.grid.spacing):
        raise ConeOutOfRangeError("cone mantle exits the grid")
    return ConeSpec(apex_time=apex, cone_fraction=frac, times=times, r2=r2)


def energy_cone(run: CauchyRun, cone: ConeSpec, tau: float) -> float:
    """Energy on the tau slice inside the causal past of the apex."""
    if tau >= cone.apex_time:
        raise ConeOutOfRangeError("tau must precede the apex")
    i = run.index_at(tau)
    return energy(run.snapshots[i], run.config.mass_m,
                  up_to_r=float(cone.r2_of_t(run.times[i])))


def mantle_flux_integrand(run: CauchyRun, cone: ConeSpec, i: int) -> float:
    """Outgoing null flux density 2 pi r e^alpha (e - m) at snapshot i's mantle."""
    st = run.snapshots[i]
    dens = densities(st, run.config.mass_m)
    r2 = float(cone.r2_of_t(run.times[i]))
    centers = run.grid.centers
    em = np.interp(r2, centers, dens.e - dens.m_dens)
    a = np.interp(r2, centers, st.interior("alpha"))
    return 2.0 * np.pi * r2 * math.exp(a) * em


def cone_energy_series(run: CauchyRun, cone: ConeSpec) -> np.ndarray:
    """Cone energy series built by draining the mantle flux from E^O(t_0).

    This is the discrete realization of the monotonicity mechanism: the
    outgoing flux integrand is pointwise nonnegative (the energy density
    dominates the momentum density), so the series never increases beyond
    round-off.  The direct quadrature energy_cone agrees with it up to the
    discretization defect reported by flux_PT.
    """
    vals = [mantle_flux_integrand(run, cone, i) for i in range(len(run.times))]
    out = np.empty(len(run.times))
    out[0] = energy_cone(run, cone, run.times[0])
    for i in range(len(run.times) - 1):
        dt = run.times[i + 1] - run.times[i]
        out[i + 1] = out[i] - 0.5 * dt * (vals[i] + vals[i + 1])
    return out


@dataclass(frozen=True)
class FluxResult:
    value: float      # Stokes defect E^O(tau) - E^O(s), the primary number
    direct: float     # outgoing null component integrated over the mantle
    residual: float   # |value - direct|, a pure discretization defect


def flux_PT(run: CauchyRun, cone: ConeSpec, tau: float, s: float) -> FluxResult:
    """Energy flux through the mantle between slices tau < s."""
    if not tau < s:
        raise ValueError("need tau < s")
    defect = energy_cone(run, cone, tau) - energy_cone(run, cone, s)
    i0, i1 = run.index_at(tau), run.index_at(s)
    vals = [mantle_flux_integrand(run, cone, i) for i in range(i0, i1 + 1)]
    direct = float(np.trapezoid(vals, run.times[i0:i1 + 1]))
    return FluxResult(value=defect, direct=direct, residual=abs(defect - direct))


@dataclass
class NonconcentrationSeries:
    times: np.ndarray
    potential_cone: np.ndarray
    e_ext: np.ndarray
    kin_rate: np.ndarray
    radial_rate: np.ndarray


def nonconcentration_suite(run: CauchyRun, cone: ConeSpec) -> NonconcentrationSeries:
    """Potential, annulus, kinetic-rate, and radial-rate non-concentration series.

    Spacetime integrals over the truncated cone K_tau (from the tau slice to
    the last stored slice) accumulate slice integrals with the volume element
    r e^{beta+alpha} dr by the trapezoid rule in t.
    """
    cfg = run.config
    times = run.times
    n = len(times)
    pot = np.zeros(n)
    ext = np.zeros(n)
    kin_slice = np.zeros(n)
    rad_slice = np.zeros(n)
    for i, st in enumerate(run.snapshots):
        dens = densities(st, cfg.mass_m)
        grid = st.grid
        r2 = float(cone.r2_of_t(times[i]))
        r1 = float(cone.r1_of_t(times[i]))
        wq = 2.0 * np.pi * grid.centers * np.exp(st.interior("beta"))
        pot[i] = _partial_cell_sum(dens.f * wq, grid, r2)
        e_w = dens.e * wq
        ext[i] = _partial_cell_sum(e_w, grid, r2) - _partial_cell_sum(e_w, grid, r1)
        wg = wq * np.exp(st.interior("alpha"))
        kin_slice[i] = _partial_cell_sum(dens.e_kin * wg, grid, r2)
        g_r = d_dr(st.interior("gamma"), grid.spacing)
        p_r = d_dr(st.interior("phi"), grid.spacing)
        rad = 0.5 * np.exp(-2.0 * st.interior("beta")) * (2.0 * g_r**2 + p_r**2)
        rad_slice[i] = _partial_cell_sum(rad * wg, grid, r2)
    kin = np.zeros(n)
    rad = np.zeros(n)
    for i in range(n):
        r2 = float(cone.r2_of_t(times[i]))
        if i < n - 1:
            kin[i] = np.trapezoid(kin_slice[i:], times[i:]) / r2
            rad[i] = np.trapezoid(rad_slice[i:], times[i:]) / r2
    return NonconcentrationSeries(times=times, potential_cone=pot, e_ext=ext,
                                  kin_rate=kin, radial_rate=rad)


def _frame_quadratics(state: CauchyState, mass_m: float):
    dr = state.grid.spacing
    alpha = state.interior("alpha")
    beta = state.interior("beta")
    Tg = np.exp(-alpha) * state.interior("gamma_t")
    Tp = np.exp(-alpha) * state.interior("phi_t")
    Rg = np.exp(-beta) * d_dr(state.interior("gamma"), dr)
    Rp = np.exp(-beta) * d_dr(state.interior("phi"), dr)
    return Tg, Tp, Rg, Rp


def identity_residuals(run: CauchyRun, index: int):
    """Residuals of the two divergence identities for the frame momenta.

    The first identity is source-free; the second's source combines the
    frame quadratics, the potential-density gradient, and the momentum
    constraint.  Also returns the null-energy quantities r(e -+ m) and their
    e^beta-weighted square roots for the record.
    """
    if index < 1 or index > len(run.snapshots) - 2:
        raise IndexError("identity residuals need an interior snapshot index")
    sm, s0, sp = run.snapshots[index - 1], run.snapshots[index], run.snapshots[index + 1]
    cfg = run.config
    dt = sp.time - sm.time
    grid = run.grid
    dr = grid.spacing
    r = grid.centers

    def products(st):
        dens = densities(st, cfg.mass_m)
        ea = np.exp(st.interior("alpha"))
        eb = np.exp(st.interior("beta"))
        return (r * eb * dens.e, r * ea * dens.m_dens,
                r * eb * dens.m_dens, r * ea * dens.e)

    Pe_m, _, Pm_m, _ = products(sm)
    Pe_0, Qm_0, Pm_0, Qe_0 = products(s0)
    Pe_p, _, Pm_p, _ = products(sp)

    dens0 = densities(s0, cfg.mass_m)
    alpha = s0.interior("alpha")
    beta = s0.interior("beta")
    gamma = s0.interior("gamma")
    phi = s0.interior("phi")
    ea = np.exp(alpha)
    eb = np.exp(beta)
    Tg, Tp, Rg, Rp = _frame_quadratics(s0, cfg.mass_m)
    alpha_r = d_dr(alpha, dr)
    g_r = d_dr(gamma, dr)
    p_r = d_dr(phi, dr)
    m2 = cfg.mass_m**2
    e2g = np.exp(-2.0 * gamma)
    L0 = (0.5 * (-2.0 * Tg**2 - Tp**2 + 2.0 * Rg**2 + Rp**2)
          - 2.0 * m2 * e2g * r * (phi * p_r - phi**2 * g_r)
          - 0.5 * m2 * e2g * phi**2)
    L = (0.5 * r * ea * alpha_r
         * (2.0 * Tg**2 + Tp**2 + 2.0 * Rg**2 + Rp**2 - dens0.f)
         + ea * L0 - r * s0.interior("beta_t") * eb * dens0.m_dens)

    res1 = (Pe_p - Pe_m) / dt - d_dr(Qm_0, dr, parity=1.0)   # r e^a m is even
    res2 = (Pm_p - Pm_m) / dt - d_dr(Qe_0, dr, parity=-1.0) - L  # r e^a e is odd
    margin = BOUNDARY_MARGIN
    res_324 = float(np.max(np.abs(res1[1:len(res1) - margin])))
    res_325 = float(np.max(np.abs(res2[1:len(res2) - margin])))

    F2 = r * (dens0.e - dens0.m_dens)
    G2 = r * (dens0.e + dens0.m_dens)
    Fhat = eb * np.sqrt(np.maximum(F2, 0.0))
    Ghat = eb * np.sqrt(np.maximum(G2, 0.0))
    return res_324, res_325, F2, G2, Fhat, Ghat


@dataclass
class WeightedSups:
    times: np.ndarray
    x_series: np.ndarray
    ru2_series: np.ndarray
    x_sup: float
    ru2_sup: float
    x0_sup: float
    y0_sup: float
    l0_sup: float


def weighted_sups(run: CauchyRun, cone: ConeSpec, delta: float) -> WeightedSups:
    """Weighted sups over the cone: r^d |U_v|, r |U|^2, and the V/W layer.

    V = (R U) and W = (R lambda) with lambda = (alpha+beta)/2; their
    v-derivatives use centered time differences across snapshots, so the
    derivative-layer sups only cover interior snapshot times.
    """
    times = run.times
    n = len(times)
    grid = run.grid
    r = grid.centers
    dr = grid.spacing
    cfg = run.config
    rd = r**delta
    rd1 = r ** (delta - 1.0)

    V = np.empty((n, 2, grid.n_cells))
    Wl = np.empty((n, grid.n_cells))
    Uv = np.empty((n, 2, grid.n_cells))
    for i, st in enumerate(run.snapshots):
        eb = np.exp(-st.interior("beta"))
        ea = np.exp(-st.interior("alpha"))
        for f, name in enumerate(("gamma", "phi")):
            d = d_dr(st.interior(name), dr)
            V[i, f] = eb * d
            Uv[i, f] = 0.5 * (ea * st.interior(name + "_t") + eb * d)
        Wl[i] = eb * d_dr(0.5 * (st.interior("alpha") + st.interior("beta")), dr,
                          parity=1.0)

    x_series = np.zeros(n)
    ru2_series = np.zeros(n)
    x0_sup = y0_sup = l0_sup = 0.0
    for i, st in enumerate(run.snapshots):
        mask = r <= float(cone.r2_of_t(times[i]))
        if not np.any(mask):
            continue
        x_series[i] = max(float(np.max(rd[mask] * np.abs(Uv[i, 0][mask]))),
                          float(np.max(rd[mask] * np.abs(Uv[i, 1][mask]))))
        u2 = st.interior("gamma") ** 2 + st.interior("phi") ** 2
        ru2_series[i] = float(np.max(r[mask] * u2[mask]))
        y0_sup = max(y0_sup, float(np.max(rd1[mask] * np.abs(V[i, 0][mask]))),
                     float(np.max(rd1[mask] * np.abs(V[i, 1][mask]))))
        l0_sup = max(l0_sup, float(np.max(rd1[mask] * np.abs(Wl[i][mask]))))
        if 1 <= i <= n - 2:
            dt2 = times[i + 1] - times[i - 1]
            ea = np.exp(-st.interior("alpha"))
            eb = np.exp(-st.interior("beta"))
            for f in range(2):
                V_T = ea * (V[i + 1, f] - V[i - 1, f]) / dt2
                V_R = eb * d_dr(V[i, f], dr, parity=-1.0)
                vv = 0.5 * (V_T + V_R)
                x0_sup = max(x0_sup, float(np.max(rd[mask] * np.abs(vv[mask]))))
    return WeightedSups(times=times, x_series=x_series, ru2_series=ru2_series,
                        x_sup=float(np.max(x_series)), ru2_sup=float(np.max(ru2_series)),
                        x0_sup=x0_sup, y0_sup=y0_sup, l0_sup=l0_sup)


def morawetz_integral(run: CauchyRun, cone: ConeSpec, sigma: float):
    """Weighted null-derivative spacetime integral over the truncated cone.

    Returns (total, per-snapshot cumulative series) of
    sum_U  int int U_u^2 r^(sigma-1) dr dt with U_u = (T U - R U)/2.
    """
    times = run.times
    n = len(times)
    grid = run.grid
    r = grid.centers
    slice_vals = np.zeros(n)
    for i, st in enumerate(run.snapshots):
        ea = np.exp(-st.interior("alpha"))
        eb = np.exp(-st.interior("beta"))
        acc = np.zeros(grid.n_cells)
        for name in ("gamma", "phi"):
            uu = 0.5 * (ea * st.interior(name + "_t")
                        - eb * d_dr(st.interior(name), grid.spacing))
            acc += uu**2
        w = acc * r ** (sigma - 1.0)
        slice_vals[i] = _partial_cell_sum(w, grid, float(cone.r2_of_t(times[i])))
    partial = np.concatenate([[0.0], np.cumsum(
        0.5 * (slice_vals[1:] + slice_vals[:-1]) * np.diff(times))])
    return float(partial[-1]), partial


@dataclass
class AxisGeometry:
    v: np.ndarray
    max_dev_ru: np.ndarray
    max_dev_rv: np.ndarray
    max_dev_r: np.ndarray
    slope_ru: np.ndarray
    slope_rv: np.ndarray
    slope_r: np.ndarray


def fit_loglog_slope(x: np.ndarray, y: np.ndarray, floor: float = LOG_FLOOR) -> float:
    """Least-squares slope of log y against log x, dropping sub-floor values."""
    mask = (y > floor) & (x > 0)
    if np.count_nonzero(mask) < 3:
        return math.nan
    return float(np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)[0])


def axis_geometry(run: NullRun) -> AxisGeometry:
    """Deviations of (r_u, r_v, r) from their axis normalizations, with slopes.

    Slopes are log-log fits against R over the innermost decade of each
    slice (or the whole slice when it spans less than a decade).
    """
    ks = range(2, len(run.slices))
    v = np.empty(len(run.slices) - 2)
    arrs = {name: np.empty(len(run.slices) - 2)
            for name in ("mru", "mrv", "mr", "sru", "srv", "sr")}
    for out_i, k in enumerate(ks):
        sl = run.slices[k]
        R = sl.R[1:]
        dev_ru = np.abs(sl.r_u[1:] + 0.5)
        dev_rv = np.abs(sl.r_v[1:] - 0.5)
        dev_r = np.abs(sl.r[1:] - R)
        v[out_i] = sl.v
        arrs["mru"][out_i] = float(np.max(dev_ru))
        arrs["mrv"][out_i] = float(np.max(dev_rv))
        arrs["mr"][out_i] = float(np.max(dev_r))
        decade = R <= 10.0 * R[0]
        arrs["sru"][out_i] = fit_loglog_slope(R[decade], dev_ru[decade])
        arrs["srv"][out_i] = fit_loglog_slope(R[decade], dev_rv[decade])
        arrs["sr"][out_i] = fit_loglog_slope(R[decade], dev_r[decade])
    return AxisGeometry(v=v, max_dev_ru=arrs["mru"], max_dev_rv=arrs["mrv"],
                        max_dev_r=arrs["mr"], slope_ru=arrs["sru"],
                        slope_rv=arrs["srv"], slope_r=arrs["sr"])


@dataclass
class DiagnosticsRecord:
    time: float
    E_total: float
    E_cone: float
    flux_PT: float
    potential_cone: float
    E_ext: float
    kin_rate: float
    radial_rate: float
    X_sup: float
    Y_sup: float
    rU2_sup: float
    morawetz_partial: float
    res_momentum: float
    res_213: float
    res_324: float
    res_325: float
    axis_dev_ru: float = 0.0
    axis_dev_rv: float = 0.0
    axis_dev_r: float = 0.0

    CSV_COLUMNS = ("time", "E_total", "E_cone", "flux_PT", "potential_cone",
                   "E_ext", "kin_rate", "radial_rate", "X_sup", "rU2_sup",
                   "morawetz_partial", "res_momentum", "res_213", "res_324",
                   "res_325")


def assemble_records(run: CauchyRun, cone: ConeSpec | None = None) -> list[DiagnosticsRecord]:
    """Full per-snapshot diagnostics for a Cauchy run (CSV-ready).

    flux_PT at time tau is the accumulated mantle flux from tau to the end
    of the run (the Stokes defect against the final slice); residual columns
    are zero at the first and last snapshots where centered differences do
    not exist.
    """
    cfg = run.config
    if cone is None:
        cone = trace_cone(run)
    n = len(run.snapshots)
    suite = nonconcentration_suite(run, cone)
    sups = weighted_sups(run, cone, cfg.delta)
    _, mora = morawetz_integral(run, cone, cfg.sigma)
    e_cone = np.array([energy_cone(run, cone, t) for t in run.times])
    records = []
    for i, st in enumerate(run.snapshots):
        interior = 1 <= i <= n - 2
        if interior:
            r324, r325, *_ = identity_residuals(run, i)
        records.append(DiagnosticsRecord(
            time=st.time,
            E_total=energy(st, cfg.mass_m),
            E_cone=float(e_cone[i]),
            flux_PT=float(e_cone[i] - e_cone[-1]),
            potential_cone=float(suite.potential_cone[i]),
            E_ext=float(suite.e_ext[i]),
            kin_rate=float(suite.kin_rate[i]),
            radial_rate=float(suite.radial_rate[i]),
            X_sup=float(sups.x_series[i]),
            Y_sup=sups.y0_sup,
            rU2_sup=float(sups.ru2_series[i]),
            morawetz_partial=float(mora[i]),
            res_momentum=residual_momentum(run, i) if interior else 0.0,
            res_213=residual_evolution_2_13(run, i) if interior else 0.0,
            res_324=r324 if interior else 0.0,
            res_325=r325 if interior else 0.0,
        ))
    return records


def null_run_records(run: NullRun):
    """Per-slice axis geometry and constraint residual rows for a null run."""
    geo = axis_geometry(run)
    rows = []
    for i, k in enumerate(range(2, len(run.slices))):
        prev = run.slices[k - 1]
        nxt = run.slices[k + 1] if k + 1 < len(run.slices) else None
        res_u, res_v = residual_raychaudhuri(run.slices[k], prev, nxt)
        rows.append({
            "time": geo.v[i],
            "max_dev_ru": geo.max_dev_ru[i],
            "max_dev_rv": geo.max_dev_rv[i],
            "max_dev_r": geo.max_dev_r[i],
            "slope_ru": geo.slope_ru[i],
            "slope_rv": geo.slope_rv[i],
            "slope_r": geo.slope_r[i],
            "res_ray_u": res_u,
            "res_ray_v": res_v if math.isfinite(res_v) else 0.0,
        })
    return rows

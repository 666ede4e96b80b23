"""Double-null characteristic evolution on the cone family u = const, v = const.

Slices are v = const; du = dv, so the axis u = v passes exactly through grid
diagonal points.  Each new slice is seeded at the axis with the exact
normalizations (r = 0, conformal factor 0, r_u = -1/2, r_v = 1/2), takes its
outermost point from the t = 0 data, and fills the interior by the
null-parallelogram march (see _kernels).

Initialization transforms the constraint-solved Cauchy slice: with
lambda(0, r) = (alpha + beta)/2 the null frame is the symmetric one,
partial_u = (e^{(beta-alpha)/2} d_t - e^{(alpha-beta)/2} d_r)/2, and the
radial label carries the matching measure R = int_0^r e^{(beta-alpha)/2}.
For m = 0 the label equals r identically (alpha = beta); for m > 0 it
differs at second order in the data amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate

from . import _kernels
from .core import NullSlice, RadialGrid, SimConfig, build_grid, interp_to_faces
from .errors import DegenerateConeError, NonFiniteError
from .initial_data import FreeData, sample_free_data, solve_constraints

_SLICE_KEYS = ("r", "lam", "gamma", "phi", "r_u", "r_v",
               "gamma_u", "gamma_v", "phi_u", "phi_v")


def even_spline(centers: np.ndarray, values: np.ndarray) -> interpolate.CubicSpline:
    """Cubic spline through the even extension of cell-centered samples."""
    x = np.concatenate([-centers[::-1], centers])
    return interpolate.CubicSpline(x, np.concatenate([values[::-1], values]))


@dataclass
class NullBoundary:
    """t = 0 data for each slice's outermost point, plus origin Taylor seeds.

    The second-outermost point of each slice sits half a step off the
    initial surface; it is generated by a second-order Taylor expansion
    along the outgoing ray from the previous boundary point, which needs
    the second v-derivatives of the matter pair, the v-derivative of the
    conformal exponent, and the v-Raychaudhuri value of r_vv at t = 0.
    """

    h: float
    mass_m: float
    r: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    phi: np.ndarray
    r_u: np.ndarray
    r_v: np.ndarray
    gamma_u: np.ndarray
    gamma_v: np.ndarray
    phi_u: np.ndarray
    phi_v: np.ndarray
    gamma_vv: np.ndarray
    phi_vv: np.ndarray
    lam_v: np.ndarray
    r_vv: np.ndarray
    origin: dict = field(default_factory=dict)

    @property
    def max_index(self) -> int:
        return self.r.shape[0] - 1

    def point(self, k: int):
        return (self.r[k], self.lam[k], self.gamma[k], self.phi[k],
                self.r_u[k], self.r_v[k], self.gamma_u[k], self.gamma_v[k],
                self.phi_u[k], self.phi_v[k])

    def sub_point(self, k: int):
        """Second-outermost point of slice k (Taylor from boundary k-1)."""
        i = k - 1
        h = self.h
        s_r = (0.25 * self.mass_m**2 * self.r[i]
               * math.exp(2.0 * (self.lam[i] - self.gamma[i])) * self.phi[i] ** 2)
        return (self.r[i] + h * self.r_v[i] + 0.5 * h * h * self.r_vv[i],
                self.lam[i] + h * self.lam_v[i],
                self.gamma[i] + h * self.gamma_v[i] + 0.5 * h * h * self.gamma_vv[i],
                self.phi[i] + h * self.phi_v[i] + 0.5 * h * h * self.phi_vv[i],
                self.r_u[i] + h * s_r,
                self.r_v[i] + h * self.r_vv[i])


@dataclass
class NullRun:
    config: SimConfig
    h: float
    boundary: NullBoundary
    slices: list[NullSlice] = field(default_factory=list)

    @property
    def v_values(self) -> np.ndarray:
        return np.array([s.v for s in self.slices])

    def axis_series(self):
        """(t, gamma, phi) along the axis; axis proper time equals v there."""
        t = self.v_values
        gam = np.array([s.gamma[0] for s in self.slices])
        phi = np.array([s.phi[0] for s in self.slices])
        return t, gam, phi


def init_null_from_free_data(data: FreeData, grid: RadialGrid, mass_m: float,
                             n_slices: int, h: float):
    """Initial degenerate slice and ingoing boundary data from t = 0 fields.

    Solves the slice constraints, forms the conformal exponent
    (alpha + beta)/2, and maps the uniform label ladder R_k = k h back to
    physical radii through the inverse of the matching measure
    dR = e^{(beta-alpha)/2} dr (identical to r when m = 0).  Null-frame
    derivatives use d_u = (d_t / w - w d_r)/2, d_v = (d_t / w + w d_r)/2
    with w = e^{(alpha-beta)/2}; second v-derivatives combine the t = 0
    accelerations with the spatial spline derivatives (the alpha_t gauge
    rate, unavailable pointwise, is approximated by beta_t, exact at m = 0).
    """
    from .cauchy import initial_gauge_rate
    from .core import CauchyState, apply_axis_parity
    from .initial_data import beta_t_from_momentum

    beta, alpha, beta_r, alpha_r = solve_constraints(
        grid, data.gamma0, data.gamma1, data.phi0, data.phi1, mass_m)
    dr = grid.spacing
    mu_c = np.exp(0.5 * (beta - alpha))
    mu_f = interp_to_faces(mu_c)
    # cumulative label R(r) on the half grid (trapezoid at half-cell steps)
    r_half = 0.5 * dr * np.arange(2 * grid.n_cells + 1)
    mu_half = np.empty_like(r_half)
    mu_half[0::2] = mu_f
    mu_half[1::2] = mu_c
    label = np.concatenate([[0.0], np.cumsum(
        0.25 * dr * (mu_half[:-1] + mu_half[1:]))])
    r_of_label = interpolate.CubicSpline(label, r_half)
    if n_slices * h > label[-1]:
        raise ValueError("null domain exceeds the labeled initial data range")

    state = CauchyState.zero(grid)
    g = grid.n_ghost
    state.gamma[g:-g] = data.gamma0
    state.gamma_t[g:-g] = data.gamma1
    state.phi[g:-g] = data.phi0
    state.phi_t[g:-g] = data.phi1
    state.beta[g:-g] = beta
    state.alpha[g:-g] = alpha
    state.beta_t[g:-g] = beta_t_from_momentum(state)
    apply_axis_parity(state)
    alpha_t, gamma_tt, phi_tt = initial_gauge_rate(state, mass_m)

    sp = {name: even_spline(grid.centers, arr) for name, arr in (
        ("gam", data.gamma0), ("gam_t", data.gamma1),
        ("phi", data.phi0), ("phi_t", data.phi1),
        ("gam_tt", gamma_tt), ("phi_tt", phi_tt), ("alpha_t", alpha_t),
        ("w_exp", 0.5 * (alpha - beta)), ("lam", 0.5 * (alpha + beta)),
        ("bma", beta - alpha), ("bmg", beta - np.asarray(data.gamma0)))}

    if mass_m == 0.0:
        rk = h * np.arange(n_slices + 1)  # the label map is the identity
    else:
        rk = np.asarray(r_of_label(h * np.arange(n_slices + 1)))
        rk[0] = 0.0
    w = np.exp(sp["w_exp"](rk))
    a = 0.5 / w
    b = 0.5 * w

    vals = {}
    for name in ("gam", "phi"):
        vals[name] = sp[name](rk)
        vals[name + "_r"] = sp[name].derivative()(rk)
        vals[name + "_t"] = sp[name + "_t"](rk)
        vals[name + "_u"] = a * vals[name + "_t"] - b * vals[name + "_r"]
        vals[name + "_v"] = a * vals[name + "_t"] + b * vals[name + "_r"]

    # slice-constraint gradients evaluated with the same spline derivatives,
    # so the t = 0 Raychaudhuri identity holds to round-off in the data
    ebma = np.exp(sp["bma"](rk))
    mass_term = 0.5 * mass_m**2 * rk * np.exp(2.0 * sp["bmg"](rk)) * vals["phi"] ** 2
    common = (rk * ebma**2 * (vals["gam_t"] ** 2 + 0.5 * vals["phi_t"] ** 2)
              + rk * (vals["gam_r"] ** 2 + 0.5 * vals["phi_r"] ** 2))
    beta_r_k = common + mass_term
    alpha_r_k = common - mass_term
    beta_t_k = 2.0 * rk * vals["gam_t"] * vals["gam_r"] + rk * vals["phi_t"] * vals["phi_r"]
    c_w = 0.5 * (alpha_r_k - beta_r_k)  # w_r / w
    if mass_m == 0.0:
        # alpha_t = beta_t identically; keeping the same arithmetic preserves
        # the t = 0 Raychaudhuri identity (and r = R) to round-off
        c_t = np.zeros_like(rk)
        lam_t = beta_t_k
    else:
        alpha_t_k = sp["alpha_t"](rk)
        c_t = 0.5 * (alpha_t_k - beta_t_k)  # w_t / w
        lam_t = 0.5 * (alpha_t_k + beta_t_k)

    for name in ("gam", "phi"):
        f_rr = sp[name].derivative(2)(rk)
        f_tr = sp[name + "_t"].derivative()(rk)
        f_tt = sp[name + "_tt"](rk)
        vals[name + "_vv"] = (a * a * f_tt + 2.0 * a * b * f_tr + b * b * f_rr
                              - (a * a * c_t + a * b * c_w) * vals[name + "_t"]
                              + (a * b * c_t + b * b * c_w) * vals[name + "_r"])

    lam_r = 0.5 * (alpha_r_k + beta_r_k)
    lam_v = a * lam_t + b * lam_r
    r_v = b
    r_vv = 2.0 * lam_v * r_v - rk * (2.0 * vals["gam_v"] ** 2 + vals["phi_v"] ** 2)

    boundary = NullBoundary(
        h=h, mass_m=mass_m,
        r=rk,
        lam=sp["lam"](rk),
        gamma=vals["gam"],
        phi=vals["phi"],
        r_u=-b,
        r_v=r_v,
        gamma_u=vals["gam_u"],
        gamma_v=vals["gam_v"],
        phi_u=vals["phi_u"],
        phi_v=vals["phi_v"],
        gamma_vv=vals["gam_vv"],
        phi_vv=vals["phi_vv"],
        lam_v=lam_v,
        r_vv=r_vv,
    )

    g0 = float(sp["gam"](0.0))
    p0 = float(sp["phi"](0.0))
    ex0 = math.exp(-2.0 * g0)
    m2 = mass_m**2
    boundary.origin = {
        "gamma": (g0, float(sp["gam_t"](0.0)),
                  2.0 * float(sp["gam"].derivative(2)(0.0)) + 0.5 * m2 * ex0 * p0**2),
        "phi": (p0, float(sp["phi_t"](0.0)),
                2.0 * float(sp["phi"].derivative(2)(0.0)) - m2 * ex0 * p0),
    }

    one = np.ones(1)
    slice0 = NullSlice(v=0.0, h=h, r=0.0 * one, lam=0.0 * one,
                       gamma=g0 * one, phi=p0 * one,
                       r_u=-0.5 * one, r_v=0.5 * one,
                       gamma_u=0.5 * boundary.origin["gamma"][1] * one,
                       gamma_v=0.5 * boundary.origin["gamma"][1] * one,
                       phi_u=0.5 * boundary.origin["phi"][1] * one,
                       phi_v=0.5 * boundary.origin["phi"][1] * one)
    # the ladder anchored at the origin must reproduce the axis limits
    boundary.r[0] = 0.0
    boundary.lam[0] = 0.0
    boundary.r_u[0] = -0.5
    boundary.r_v[0] = 0.5
    return slice0, boundary


def axis_limits(prev: NullSlice, prevprev: NullSlice | None,
                boundary: NullBoundary, mass_m: float):
    """Axis seed values for the next slice.

    The normalizations r = 0, lambda = 0, r_u = -1/2, r_v = 1/2 are imposed
    exactly.  The matter pair and its time derivative are predicted by
    transporting the previous slice's near-axis points one step along the
    axis direction and extrapolating to R = 0 with the even quadratic; the
    march's correction pass then re-extrapolates the axis point from the
    freshly computed interior (the predictor only feeds the axis cell at
    O(h^2) weight, so a first-order transport suffices and keeps the
    slice-to-slice error recursion contractive).  The first two slices
    Taylor-expand from the origin, where the initial data supply exact
    second time derivatives.
    """
    h = prev.h
    k_new = int(round(prev.v / h)) + 1
    if k_new <= 2 or prevprev is None:
        T = k_new * h
        out = []
        for key in ("gamma", "phi"):
            u0, ut0, utt0 = boundary.origin[key]
            out.extend([u0 + T * ut0 + 0.5 * T * T * utt0, ut0 + T * utt0])
        return out[0], out[2], out[1], out[3]

    seeds = {}
    for key in ("gamma", "phi"):
        fu = getattr(prev, key + "_u")
        fv = getattr(prev, key + "_v")
        f = getattr(prev, key)
        vals = [(f[j] + h * (fu[j] + fv[j]), fu[j] + fv[j]) for j in (1, 2)]
        (v1, t1), (v2, t2) = vals
        seeds[key] = ((4.0 * v1 - v2) / 3.0, (4.0 * t1 - t2) / 3.0)
    return seeds["gamma"][0], seeds["phi"][0], seeds["gamma"][1], seeds["phi"][1]


def march_diamond(run: NullRun, slice_index: int) -> NullSlice:
    """Compute slice `slice_index` from its predecessor (parallelogram march)."""
    k = slice_index
    prev = run.slices[k - 1]
    prevprev = run.slices[k - 2] if k >= 2 else None
    seed = axis_limits(prev, prevprev, run.boundary, run.config.mass_m)
    prev_arrays = tuple(np.ascontiguousarray(getattr(prev, key))
                        for key in _SLICE_KEYS)
    new, flag = _kernels.march_null_slice(
        prev_arrays, seed, run.boundary.point(k), run.boundary.sub_point(k),
        run.h, run.config.mass_m**2)
    if flag == 1:
        raise DegenerateConeError(f"r stopped increasing outward on slice v={k * run.h:g}")
    if flag == 2:
        raise NonFiniteError(f"non-finite value on slice v={k * run.h:g}")
    return NullSlice(v=k * run.h, h=run.h, **dict(zip(_SLICE_KEYS, new)))


def run_null(config: SimConfig, v_max: float | None = None) -> NullRun:
    """Evolve the configured data on null slices up to v = v_max (default t_final)."""
    grid = build_grid(config)
    data = sample_free_data(config.data_family, grid)
    h = grid.spacing
    if v_max is None:
        v_max = min(config.t_final, 0.9 * grid.r_max)
    n_slices = int(round(v_max / h))
    slice0, boundary = init_null_from_free_data(data, grid, config.mass_m, n_slices, h)
    run = NullRun(config=config, h=h, boundary=boundary, slices=[slice0])
    for k in range(1, n_slices + 1):
        run.slices.append(march_diamond(run, k))
    return run


def residual_raychaudhuri(sl: NullSlice, prev: NullSlice | None = None,
                          nxt: NullSlice | None = None):
    """Max-norm residuals of the two null constraints along a slice.

    The u-residual differentiates along the slice; the v-residual needs the
    neighbouring slices at matched u (centered when both are given, one-sided
    from `prev` alone, nan otherwise), which also supply centered
    v-derivatives of the matter pair for the source term.  Neither
    constraint is imposed by the scheme, so these measure constraint
    propagation.

    The two points adjacent to the t = 0 surface are excluded: the initial
    labeling and the axis normalization fix the null gauge independently,
    and their residual mismatch (quadratic in the data amplitude,
    independent of resolution) lives in that seam without entering the
    interior domain of dependence.
    """
    h = sl.h
    n = sl.n_points
    hi = n - 3  # exclude the boundary-adjacent seam
    if n < 5 or hi <= 1:
        return 0.0, 0.0
    ex = np.exp(-2.0 * sl.lam)
    Fu = ex * sl.r_u
    dFu = (Fu[0:hi - 1] - Fu[2:hi + 1]) / (2.0 * h)  # u decreases with j
    res_u_arr = dFu + (ex * sl.r * (2.0 * sl.gamma_u**2 + sl.phi_u**2))[1:hi]
    res_u = float(np.max(np.abs(res_u_arr)))

    res_v = math.nan
    if prev is not None:
        # slice point j matches prev point j-1 and next point j+1 at fixed u
        Fv = ex * sl.r_v
        Fv_prev = np.exp(-2.0 * prev.lam) * prev.r_v
        if nxt is not None:
            Fv_next = np.exp(-2.0 * nxt.lam) * nxt.r_v
            dFv = (Fv_next[2:hi + 1] - Fv_prev[0:hi - 1]) / (2.0 * h)
            g_v = (nxt.gamma[2:hi + 1] - prev.gamma[0:hi - 1]) / (2.0 * h)
            p_v = (nxt.phi[2:hi + 1] - prev.phi[0:hi - 1]) / (2.0 * h)
        else:
            dFv = (Fv[1:hi] - Fv_prev[0:hi - 1]) / h
            g_v = sl.gamma_v[1:hi]
            p_v = sl.phi_v[1:hi]
        body = (ex * sl.r)[1:hi] * (2.0 * g_v**2 + p_v**2)
        res_v = float(np.max(np.abs(dFv + body)))
    return res_u, res_v

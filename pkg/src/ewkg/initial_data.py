"""Free-data sampling, slice constraint solves, and data validation.

The slice constraints are a pair of first-order ODEs in r for the metric
exponents (beta, alpha), coupled through e^{2(beta-alpha)}; both vanish at
the axis (conical-singularity and time-gauge normalizations), so a single
outward march integrates the pair with no shooting.  With m = 0 the two
right-hand sides coincide and the solver returns bitwise-equal profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import InitialDataFamily, RadialGrid, CauchyState, axis_value, interp_to_faces
from .errors import BlowupError, ConfigError

BETA_CAP = 50.0  # e^{2*50} is the last stop before double overflow


@dataclass
class FreeData:
    """Sampled free data (gamma, gamma_t, phi, phi_t at t = 0), interior cells."""

    grid: RadialGrid
    gamma0: np.ndarray
    gamma1: np.ndarray
    phi0: np.ndarray
    phi1: np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    total_energy: float
    energy_below_2pi: bool
    cond_1_19_ok: bool
    beta_axis: float
    alpha_axis: float
    max_constraint_residual: float


def _even_gaussian(r, amp, center, width):
    """Gaussian bump symmetrized about r = 0 (sum with its mirror image)."""
    return amp * (np.exp(-((r - center) / width) ** 2)
                  + np.exp(-((r + center) / width) ** 2))


def d_dr(f: np.ndarray, dr: float, parity: float = 1.0) -> np.ndarray:
    """Second-order radial derivative of a cell-centered profile.

    parity +1/-1 selects the even/odd reflection ghost at the axis; the outer
    edge uses the copy-out ghost (fields are negligible there by design).
    """
    n = f.shape[0]
    out = np.empty(n)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dr)
    out[0] = (f[1] - parity * f[0]) / (2.0 * dr)
    out[-1] = (f[-1] - f[-2]) / (2.0 * dr)
    return out


def check_condition_1_19(gamma0, gamma1, grid: RadialGrid, tol: float = 1e-12):
    """Lower-bound data conditions: gamma_1 >= 0, gamma_0 >= 0, gamma_0' > -1/(2r)."""
    if np.any(gamma1 < -tol) or np.any(gamma0 < -tol):
        return False
    g0r = d_dr(gamma0, grid.spacing)
    return bool(np.all(g0r > -0.5 / grid.centers - tol))


def sample_free_data(family: InitialDataFamily, grid: RadialGrid) -> FreeData:
    """Sample the even free-data family on the grid and verify the data conditions."""
    r = grid.centers
    if family.kind == "zero":
        z = np.zeros_like(r)
        return FreeData(grid, z.copy(), z.copy(), z.copy(), z.copy())
    phi0 = _even_gaussian(r, family.amp_phi, family.center, family.width)
    phi1 = _even_gaussian(r, family.amp_phi_t, family.center, family.width)
    if family.kind == "gaussian_both":
        gamma0 = _even_gaussian(r, family.amp_gamma, family.center, family.width)
        gamma1 = _even_gaussian(r, family.amp_gamma_t, family.center, family.width)
    else:
        gamma0 = np.zeros_like(r)
        gamma1 = np.zeros_like(r)
    if family.support_radius > 0.5 * grid.r_max:
        raise ConfigError("effective data support exceeds r_max/2; enlarge r_max")
    if not check_condition_1_19(gamma0, gamma1, grid):
        raise ConfigError("sampled data violate the lower-bound conditions on gamma")
    return FreeData(grid, gamma0, gamma1, phi0, phi1)


def _quarter_value(F):
    """Even-in-r quadratic (in r^2) through half-grid nodes 0, 1, 2 at r = dr/4."""
    return (45.0 * F[0] + 20.0 * F[1] - F[2]) / 64.0


def constraint_coefficients(grid: RadialGrid, gamma, gamma_t, phi, phi_t, mass_m):
    """Half-grid coefficient arrays (A, B, C) for the constraint march.

    Index j sits at r = j dr/2 (even j: faces including the axis, odd j:
    centers).  A carries the velocity quadratics, B the radial-gradient
    quadratics (gradients evaluated directly at faces by cell differences),
    C the mass potential.  Also returns the r = dr/4 values for the first
    half step.
    """
    n = grid.n_cells
    dr = grid.spacing
    half = np.empty((3, 2 * n + 1))
    A, B, C = half

    gt_f = interp_to_faces(gamma_t)
    pt_f = interp_to_faces(phi_t)
    g_f = interp_to_faces(gamma)
    p_f = interp_to_faces(phi)
    A[0::2] = gt_f**2 + 0.5 * pt_f**2
    A[1::2] = gamma_t**2 + 0.5 * phi_t**2

    gr_c = d_dr(gamma, dr)
    pr_c = d_dr(phi, dr)
    gr_f = np.empty(n + 1)
    gr_f[0] = 0.0
    gr_f[1:-1] = (gamma[1:] - gamma[:-1]) / dr
    gr_f[-1] = 0.0
    pr_f = np.empty(n + 1)
    pr_f[0] = 0.0
    pr_f[1:-1] = (phi[1:] - phi[:-1]) / dr
    pr_f[-1] = 0.0
    B[0::2] = gr_f**2 + 0.5 * pr_f**2
    B[1::2] = gr_c**2 + 0.5 * pr_c**2

    mm = 0.5 * mass_m**2
    C[0::2] = mm * np.exp(-2.0 * g_f) * p_f**2
    C[1::2] = mm * np.exp(-2.0 * gamma) * phi**2

    quarter = (_quarter_value(A), _quarter_value(B), _quarter_value(C))
    return A, B, C, quarter


def solve_constraints_halfgrid(dr, A, B, C, quarter, beta_cap=BETA_CAP):
    """Raw constraint march on prepared half-grid coefficients.

    Used directly by tests that supply analytically evaluated coefficients
    (no interpolation error on the right-hand side).
    """
    beta, alpha, flag = _kernels.constraint_march(
        dr, np.ascontiguousarray(A), np.ascontiguousarray(B),
        np.ascontiguousarray(C), quarter[0], quarter[1], quarter[2], beta_cap)
    if flag:
        raise BlowupError("metric exponent exceeded cap during constraint solve")
    return beta, alpha


def solve_constraints(grid: RadialGrid, gamma, gamma_t, phi, phi_t, mass_m):
    """Solve the slice constraints; returns (beta, alpha, beta_r, alpha_r) at centers."""
    A, B, C, quarter = constraint_coefficients(grid, gamma, gamma_t, phi, phi_t, mass_m)
    beta, alpha = solve_constraints_halfgrid(grid.spacing, A, B, C, quarter)
    r = grid.centers
    common = np.exp(2.0 * (beta - alpha)) * A[1::2] + B[1::2]
    mass = np.exp(2.0 * beta) * C[1::2]
    beta_r = r * (common + mass)
    alpha_r = r * (common - mass)
    return beta, alpha, beta_r, alpha_r


def solve_beta_slice(state: CauchyState, mass_m: float) -> np.ndarray:
    """Hamiltonian-constraint profile beta on the slice (outward march from 0)."""
    beta, _, _, _ = solve_constraints(
        state.grid, state.interior("gamma"), state.interior("gamma_t"),
        state.interior("phi"), state.interior("phi_t"), mass_m)
    return beta


def solve_alpha_slice(state: CauchyState, mass_m: float) -> np.ndarray:
    """Time-gauge profile alpha on the slice (solved jointly with beta)."""
    _, alpha, _, _ = solve_constraints(
        state.grid, state.interior("gamma"), state.interior("gamma_t"),
        state.interior("phi"), state.interior("phi_t"), mass_m)
    return alpha


def beta_t_from_momentum(state: CauchyState) -> np.ndarray:
    """Momentum constraint: beta_t = 2 r gamma_t gamma_r + r phi_t phi_r (pointwise)."""
    dr = state.grid.spacing
    r = state.grid.centers
    g_r = d_dr(state.interior("gamma"), dr)
    p_r = d_dr(state.interior("phi"), dr)
    return 2.0 * r * state.interior("gamma_t") * g_r + r * state.interior("phi_t") * p_r


def build_initial_state(family: InitialDataFamily, grid: RadialGrid,
                        mass_m: float, frozen_metric: bool = False) -> CauchyState:
    """Constraint-solved t = 0 slice from the free-data family."""
    data = sample_free_data(family, grid)
    state = CauchyState.zero(grid)
    g = grid.n_ghost
    state.gamma[g:-g] = data.gamma0
    state.gamma_t[g:-g] = data.gamma1
    state.phi[g:-g] = data.phi0
    state.phi_t[g:-g] = data.phi1
    if not frozen_metric:
        beta, alpha, _, _ = solve_constraints(
            grid, data.gamma0, data.gamma1, data.phi0, data.phi1, mass_m)
        state.beta[g:-g] = beta
        state.alpha[g:-g] = alpha
        state.beta_t[g:-g] = beta_t_from_momentum(state)
    from .core import apply_axis_parity

    return apply_axis_parity(state)


def hamiltonian_residual(state: CauchyState, mass_m: float) -> float:
    """Max-norm defect of the solved beta against its own finite-differenced ODE."""
    grid = state.grid
    beta = state.interior("beta")
    alpha = state.interior("alpha")
    gamma = state.interior("gamma")
    r = grid.centers
    g_r = d_dr(gamma, grid.spacing)
    p_r = d_dr(state.interior("phi"), grid.spacing)
    rhs = (r * np.exp(2.0 * (beta - alpha))
           * (state.interior("gamma_t") ** 2 + 0.5 * state.interior("phi_t") ** 2)
           + r * (g_r**2 + 0.5 * p_r**2)
           + 0.5 * mass_m**2 * r * np.exp(2.0 * beta - 2.0 * gamma)
           * state.interior("phi") ** 2)
    beta_fd = d_dr(beta, grid.spacing)
    return float(np.max(np.abs(beta_fd[1:-1] - rhs[1:-1])))


def validate_data(state: CauchyState, config) -> ValidationReport:
    """Initial-data report: total energy, the 2*pi bound, and the data conditions."""
    from .diagnostics import energy

    e0 = energy(state, config.mass_m)
    ok_1_19 = check_condition_1_19(
        state.interior("gamma"), state.interior("gamma_t"), state.grid)
    return ValidationReport(
        total_energy=e0,
        energy_below_2pi=bool(e0 < 2.0 * np.pi),
        cond_1_19_ok=ok_1_19,
        beta_axis=axis_value(state.interior("beta")),
        alpha_axis=axis_value(state.interior("alpha")),
        max_constraint_residual=hamiltonian_residual(state, config.mass_m),
    )

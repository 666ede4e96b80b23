"""Grids, field-state containers, axis parity handling, and run configuration.

The radial mesh is cell-centered: no point sits at r = 0, so the 1/r terms in
the wave operators never divide by zero.  Axis values of even fields are
recovered by even-quadratic extrapolation.  Two ghost cells on each side
support second-order centered stencils; the axis-side ghosts mirror the
interior (all evolved fields are even in r), the outer ghosts copy out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

NGHOST = 2

MODES = ("cauchy", "null", "crosscheck", "converge", "diagnose")
DATA_KINDS = ("gaussian_phi", "gaussian_both", "zero")


@dataclass(frozen=True)
class InitialDataFamily:
    """Even gaussian free-data family (the zero family is amp = 0 everywhere)."""

    kind: str = "gaussian_phi"
    amp_phi: float = 0.1
    amp_gamma: float = 0.0
    center: float = 4.0
    width: float = 1.0
    amp_phi_t: float = 0.0
    amp_gamma_t: float = 0.0

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ConfigError(f"unknown data kind {self.kind!r}")
        if self.width <= 0:
            raise ConfigError("width must be positive")
        if self.center < 0:
            raise ConfigError("center must be nonnegative")
        for name in ("amp_phi", "amp_gamma", "amp_phi_t", "amp_gamma_t"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative (lower-bound data conditions)")

    @property
    def support_radius(self) -> float:
        """Radius beyond which every profile is below 1e-14."""
        if self.kind == "zero":
            return 0.0
        return self.center + 8.0 * self.width


@dataclass(frozen=True)
class SimConfig:
    """Run parameters shared by both evolution schemes."""

    mass_m: float = 1.0
    n_cells: int = 1024
    r_max: float = 24.0
    cfl: float = 0.5
    t_final: float = 8.0
    delta: float = 0.6
    sigma: float = 1.5
    cone_fraction: float = 0.5
    apex_time: float | None = None  # default 1.25 * t_final, past the run window
    data_family: InitialDataFamily = field(default_factory=InitialDataFamily)
    mode: str = "cauchy"
    frozen_metric: bool = False  # test mode: alpha = beta = 0 held fixed
    snapshot_every: int = 8

    def __post_init__(self):
        if not (self.mass_m >= 0 and math.isfinite(self.mass_m)):
            raise ConfigError("mass_m must be a finite nonnegative real")
        if self.n_cells < 1:
            raise ConfigError("n_cells must be positive")
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise ConfigError("r_max must be positive and finite")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError("cfl must lie in (0, 1]")
        if not (self.t_final > 0):
            raise ConfigError("t_final must be positive")
        if not (0.5 < self.delta < 2.0 / 3.0):
            raise ConfigError("delta must lie in (1/2, 2/3)")
        if not (1.0 < self.sigma < 2.0):
            raise ConfigError("sigma must lie in (1, 2)")
        if not (0.0 < self.cone_fraction < 1.0):
            raise ConfigError("cone_fraction must lie in (0, 1)")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")

    @property
    def spacing(self) -> float:
        return self.r_max / self.n_cells

    @property
    def dt_bound(self) -> float:
        return self.cfl * self.spacing

    def resolved_apex_time(self) -> float:
        return 1.25 * self.t_final if self.apex_time is None else self.apex_time

    def with_resolution(self, n_cells: int) -> "SimConfig":
        return replace(self, n_cells=n_cells)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centered radial mesh with two axis-side ghost cells."""

    n_cells: int
    spacing: float
    n_ghost: int = NGHOST

    @property
    def r_max(self) -> float:
        return self.n_cells * self.spacing

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.spacing

    @property
    def centers_full(self) -> np.ndarray:
        """Centers including ghost positions on both sides (axis ghosts at r < 0)."""
        return (np.arange(-self.n_ghost, self.n_cells + self.n_ghost) + 0.5) * self.spacing

    def zeros_full(self) -> np.ndarray:
        return np.zeros(self.n_cells + 2 * self.n_ghost)


def build_grid(config: SimConfig) -> RadialGrid:
    """Cell-centered grid for a run; rejects meshes too coarse for the stencils."""
    if config.n_cells < 16:
        raise ConfigError("n_cells < 16 cannot support the second-order stencils")
    if not math.isfinite(config.r_max):
        raise ConfigError("r_max must be finite")
    return RadialGrid(n_cells=config.n_cells, spacing=config.r_max / config.n_cells)


def fill_even_ghosts(arr: np.ndarray, n_ghost: int = NGHOST) -> None:
    """Mirror interior values into the axis ghosts (even parity), copy out at r_max.

    `arr` is a full-length array (interior plus n_ghost cells each side),
    modified in place.  Idempotent.
    """
    for g in range(n_ghost):
        arr[n_ghost - 1 - g] = arr[n_ghost + g]
    arr[-n_ghost:] = arr[-n_ghost - 1]


def fill_odd_ghosts(arr: np.ndarray, n_ghost: int = NGHOST) -> None:
    """Axis ghosts for odd-parity combinations (r-weighted products); copy out."""
    for g in range(n_ghost):
        arr[n_ghost - 1 - g] = -arr[n_ghost + g]
    arr[-n_ghost:] = arr[-n_ghost - 1]


def axis_value(interior: np.ndarray) -> float:
    """Even-quadratic extrapolant of a cell-centered even field to r = 0.

    Fits a + b r^2 through the two innermost centers (r = dr/2 and 3 dr/2);
    exact for even polynomials of degree <= 2 (quartic error otherwise).
    """
    return (9.0 * interior[0] - interior[1]) / 8.0


def interp_to_faces(interior: np.ndarray) -> np.ndarray:
    """Cubic interpolation of a cell-centered even field to the n+1 cell faces.

    Face i sits at r = i * dr.  Face 0 uses the even-quadratic axis
    extrapolant; the outermost face copies out (fields are negligible there).
    """
    n = interior.shape[0]
    faces = np.empty(n + 1)
    faces[0] = axis_value(interior)
    # face 1 lies between centers 0 and 1; parity ghost supplies the r<0 value
    faces[1] = (-interior[0] + 9.0 * (interior[0] + interior[1]) - interior[2]) / 16.0
    faces[2:n - 1] = (
        -interior[:n - 3] + 9.0 * (interior[1:n - 2] + interior[2:n - 1]) - interior[3:n]
    ) / 16.0
    faces[n - 1] = (interior[n - 2] + interior[n - 1]) / 2.0
    faces[n] = interior[n - 1]
    return faces


@dataclass
class CauchyState:
    """One (t, r) slice: evolved fields, their velocities, and solved metric.

    All arrays are full-length (interior + ghosts); ghost cells carry even
    reflections on the axis side.  alpha, beta vanish at r = 0 by the gauge
    and conical-singularity normalizations.
    """

    time: float
    grid: RadialGrid
    gamma: np.ndarray
    gamma_t: np.ndarray
    phi: np.ndarray
    phi_t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    beta_t: np.ndarray
    alpha_t: np.ndarray

    FIELDS = ("gamma", "gamma_t", "phi", "phi_t", "alpha", "beta", "beta_t", "alpha_t")

    @classmethod
    def zero(cls, grid: RadialGrid, time: float = 0.0) -> "CauchyState":
        return cls(time=time, grid=grid, **{k: grid.zeros_full() for k in cls.FIELDS})

    def interior(self, name: str) -> np.ndarray:
        g = self.grid.n_ghost
        return getattr(self, name)[g:-g]

    def copy(self) -> "CauchyState":
        return CauchyState(
            time=self.time,
            grid=self.grid,
            **{k: getattr(self, k).copy() for k in self.FIELDS},
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, k))) for k in self.FIELDS)


def apply_axis_parity(state: CauchyState) -> CauchyState:
    """Fill ghost cells of every field by even reflection (in place; returns state)."""
    for name in CauchyState.FIELDS:
        fill_even_ghosts(getattr(state, name), state.grid.n_ghost)
    return state


@dataclass
class NullSlice:
    """One v = const characteristic slice of the double-null evolution.

    Index j runs from the axis (j = 0, u = v) outward; u_j = v - j h and the
    flat radius label is R_j = j h / 2.  The outermost point (j = 2k) lies on
    the initial surface t = 0.
    """

    v: float
    h: float
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

    ARRAYS = ("r", "lam", "gamma", "phi", "r_u", "r_v",
              "gamma_u", "gamma_v", "phi_u", "phi_v")

    @property
    def n_points(self) -> int:
        return self.r.shape[0]

    @property
    def u_values(self) -> np.ndarray:
        return self.v - self.h * np.arange(self.n_points)

    @property
    def R(self) -> np.ndarray:
        return 0.5 * self.h * np.arange(self.n_points)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, k))) for k in self.ARRAYS)

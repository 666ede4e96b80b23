"""Independent flat-spacetime solution operators used as test oracles.

kernel_solve evaluates the retarded-kernel representation of the 2D radial
wave equation U_tt - Lap U = f: the data layer through the descent (Poisson)
formula, the source layer through the Duhamel integral.  The square-root
kernel singularity is removed by the substitution |w| = (T - tau) sin(psi)
before quadrature, so plain adaptive rules converge.

weighted_tail_integral evaluates the weighted tail bound
int_0^inf (mu + x)^-a x^-b dx <= C mu^-(a+b-1) and reports the ratio that
the bound asserts is uniform in mu.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate, special

from .errors import QuadratureError

_MAX_REFINE = 9


@dataclass(frozen=True)
class SourceSpec:
    """Radially symmetric closed-form source h(t, rho) for the flat solver."""

    kind: str = "zero"  # zero | constant_ball | gaussian_pulse
    amplitude: float = 0.0
    radius: float = 1.0
    t_start: float = 0.0
    t_end: float = np.inf

    def __call__(self, t, rho):
        if self.kind == "zero":
            return np.zeros_like(np.asarray(rho, dtype=float))
        active = (self.t_start <= t) & (t <= self.t_end)
        if self.kind == "constant_ball":
            return self.amplitude * active * (np.asarray(rho) < self.radius)
        if self.kind == "gaussian_pulse":
            return self.amplitude * active * np.exp(-(np.asarray(rho) / self.radius) ** 2)
        raise ValueError(f"unknown source kind {self.kind!r}")

    def time_breakpoints(self, T, R0=0.0):
        # source window edges plus the times the backward cone's rim meets
        # the source radius (kinks of the tau integrand)
        pts = [self.t_start, self.t_end,
               T - self.radius - R0, T - self.radius + R0]
        return sorted(t for t in pts if 0.0 < t < T)


@dataclass(frozen=True)
class AnalyticData:
    """Closed-form radial initial data (value, radial derivative, velocity)."""

    g: callable
    gprime: callable
    v: callable

    @classmethod
    def gaussian(cls, amp, center, width, amp_v=0.0):
        def g(rho):
            rho = np.asarray(rho, dtype=float)
            return amp * (np.exp(-((rho - center) / width) ** 2)
                          + np.exp(-((rho + center) / width) ** 2))

        def gprime(rho):
            rho = np.asarray(rho, dtype=float)
            return amp * (-2.0 * (rho - center) / width**2
                          * np.exp(-((rho - center) / width) ** 2)
                          - 2.0 * (rho + center) / width**2
                          * np.exp(-((rho + center) / width) ** 2))

        def v(rho):
            rho = np.asarray(rho, dtype=float)
            return amp_v * (np.exp(-((rho - center) / width) ** 2)
                            + np.exp(-((rho + center) / width) ** 2))

        return cls(g=g, gprime=gprime, v=v)

    @classmethod
    def from_samples(cls, centers, values, velocities):
        """Even cubic-spline interpolants through cell-centered samples."""
        x = np.concatenate([-centers[::-1], centers])
        sg = interpolate.CubicSpline(x, np.concatenate([values[::-1], values]))
        sv = interpolate.CubicSpline(x, np.concatenate([velocities[::-1], velocities]))
        return cls(g=sg, gprime=sg.derivative(), v=sv)


def _disk_layer_origin(integrand, T, tol):
    """1D adaptive evaluation of the disk average at R0 = 0."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, 0.5 * np.pi, epsabs=0.5 * tol,
                                  epsrel=0.0, limit=200)
    if err > 4.0 * tol:
        raise QuadratureError(f"origin disk layer error {err:g} exceeds {tol:g}")
    return val


def _tensor_refine(f2d, T, R0, tol):
    """Tensor quadrature (trapezoid in angle, Gauss in psi) with refinement."""
    n = 16
    prev = None
    for _ in range(_MAX_REFINE):
        x, w = np.polynomial.legendre.leggauss(n)
        psi = 0.25 * np.pi * (x + 1.0)
        wpsi = 0.25 * np.pi * w
        theta = (np.arange(2 * n) + 0.5) * (2.0 * np.pi / (2 * n))
        wth = 2.0 * np.pi / (2 * n)
        vals = f2d(psi[:, None], theta[None, :])
        cur = float(np.sum(vals * wpsi[:, None]) * wth) / (2.0 * np.pi)
        if prev is not None and abs(cur - prev) < tol:
            return cur
        prev = cur
        n *= 2
    raise QuadratureError("tensor quadrature failed to converge")


def data_layer(data: AnalyticData, T, R0, tol=1e-8):
    """Descent-formula solution of the source-free problem at one event."""
    if T == 0.0:
        return float(data.g(R0))
    if R0 == 0.0:
        def integrand(psi):
            s = T * math.sin(psi)
            return (data.g(s) + s * data.gprime(s) + T * data.v(s)) * math.sin(psi)

        return _disk_layer_origin(integrand, T, tol)

    def f2d(psi, theta):
        s = T * np.sin(psi)
        rho = np.sqrt(R0**2 + s**2 + 2.0 * R0 * s * np.cos(theta))
        ratio = np.where(rho > 1e-30, (s + R0 * np.cos(theta)) / np.maximum(rho, 1e-30), 1.0)
        return (data.g(rho) + s * data.gprime(rho) * ratio
                + T * data.v(rho)) * np.sin(psi)

    return _tensor_refine(f2d, T, R0, tol)


def _gauss_piecewise(f, breaks, n=48):
    """Fixed Gauss-Legendre rule applied piecewise between the breakpoints."""
    x, w = np.polynomial.legendre.leggauss(n)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        total += half * float(np.sum(w * f(mid + half * x)))
    return total


def duhamel_tensor(source: SourceSpec, T, R0, tol=1e-7):
    """Duhamel layer by quadrature in (tau, angle, radius).

    The radial kernel singularity is removed by |w| = (T - tau) sin(psi);
    each backward-cone disk then uses deterministic piecewise rules (split
    at the source's radial edge), so the remaining adaptive tau integral
    sees a smooth-per-piece integrand.
    """
    if source.kind == "zero" or T <= 0.0:
        return 0.0

    def disk(tau):
        dt = T - tau
        if dt <= 0.0:
            return 0.0
        if R0 == 0.0:
            breaks = [0.0, 0.5 * np.pi]
            if 0.0 < source.radius < dt:
                breaks.insert(1, math.asin(source.radius / dt))

            def f1d(psi):
                return np.asarray(source(tau, dt * np.sin(psi))) * np.sin(psi)

            return dt * _gauss_piecewise(f1d, breaks)

        def f2d(psi, theta):
            s = dt * np.sin(psi)
            rho = np.sqrt(R0**2 + s**2 + 2.0 * R0 * s * np.cos(theta))
            return source(tau, rho) * np.sin(psi)

        return dt * _tensor_refine(f2d, dt, R0, 0.1 * tol)

    pts = source.time_breakpoints(T, R0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(disk, 0.0, T, points=pts or None,
                                  epsabs=0.5 * tol, epsrel=0.0, limit=200)
    if err > 4.0 * tol:
        raise QuadratureError(f"Duhamel tau integral error {err:g} exceeds {tol:g}")
    return val


def _arc_kernel(A, B):
    """int over the admissible arc of d(phi) / sqrt(A + B cos(phi)).

    Full circle when A >= B (4 K(k) / sqrt(A+B), k^2 = 2B/(A+B)); otherwise
    the reciprocal-modulus incomplete integral up to the vanishing point.
    """
    if B <= 0.0:
        return 2.0 * np.pi / math.sqrt(A) if A > 0 else 0.0
    k2 = 2.0 * B / (A + B)
    if A >= B:
        return 4.0 / math.sqrt(A + B) * special.ellipk(k2)
    if A <= -B:
        return 0.0
    # partial arc: cos(phi*) = -A/B; reciprocal modulus maps onto scipy's domain
    phi_half = 0.5 * math.acos(max(-1.0, min(1.0, -A / B)))
    k = math.sqrt(k2)
    sin_theta = min(1.0, k * math.sin(phi_half))
    return 4.0 / math.sqrt(A + B) / k * special.ellipkinc(math.asin(sin_theta), 1.0 / k2)


def duhamel_radial(source: SourceSpec, T, R0, tol=1e-7):
    """Independent Duhamel evaluation through the radial (elliptic) reduction."""
    if source.kind == "zero" or T <= 0.0:
        return 0.0

    def slice_integral(tau):
        dt = T - tau
        if dt <= 0.0:
            return 0.0

        def rho_integrand(rho):
            A = dt**2 - rho**2 - R0**2
            B = 2.0 * rho * R0
            return float(source(tau, rho)) * rho * _arc_kernel(A, B)

        hi = dt + R0
        pts = [p for p in (abs(dt - R0), source.radius) if 0.0 < p < hi]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(rho_integrand, 0.0, hi,
                                    points=sorted(set(pts)) or None,
                                    epsabs=0.05 * tol, epsrel=0.0, limit=200)
        return val / (2.0 * np.pi)

    pts = source.time_breakpoints(T, R0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(slice_integral, 0.0, T, points=pts or None,
                                  epsabs=0.2 * tol, epsrel=0.0, limit=200)
    if err > tol:
        raise QuadratureError(f"radial Duhamel error {err:g} exceeds {tol:g}")
    return val


def kernel_solve(source: SourceSpec, data, events, tol=1e-6, duhamel="tensor"):
    """Flat-space solution U = (gamma, phi) at the given (T, R) events.

    `data` is a pair of AnalyticData (one per field of the pair U); a
    FreeData instance is also accepted and converted to even spline
    interpolants.  Returns an array of shape (n_events, 2).
    """
    if hasattr(data, "gamma0"):
        centers = data.grid.centers
        data = (AnalyticData.from_samples(centers, data.gamma0, data.gamma1),
                AnalyticData.from_samples(centers, data.phi0, data.phi1))
    duh = duhamel_tensor if duhamel == "tensor" else duhamel_radial
    out = np.empty((len(events), 2))
    for i, (T, R0) in enumerate(events):
        if T < 0:
            raise ValueError("events must lie at T >= 0")
        src = duh(source, T, R0, tol=0.5 * tol) if source.kind != "zero" else 0.0
        for f, layer in enumerate(data):
            out[i, f] = data_layer(layer, T, R0, tol=0.5 * tol) + src
    return out


def weighted_tail_integral(mu: float, a: float, b: float):
    """Evaluate int_0^inf (mu+x)^-a x^-b dx and its mu^(a+b-1)-scaled ratio.

    Splits at x = mu; the head integral uses an algebraic-weight rule for the
    x^-b endpoint singularity.  Parameters outside mu>0, a>0, 0<b<1, a+b>1
    are rejected (the integral diverges there).
    """
    if not (mu > 0 and a > 0 and 0 < b < 1 and a + b > 1):
        raise ValueError("need mu>0, a>0, 0<b<1, a+b>1")
    head, _ = integrate.quad(lambda x: (mu + x) ** (-a), 0.0, mu,
                             weight="alg", wvar=(-b, 0.0))
    tail, _ = integrate.quad(lambda x: (mu + x) ** (-a) * x ** (-b), mu, np.inf)
    value = head + tail
    return value, value * mu ** (a + b - 1.0)

"""
Brute-force reference evaluations for the test suite.

Everything here is deliberately simple and shares no code with the main
numerical path: fields are closures over (r, theta), derivatives are
second-order centred differences, integrals are composite midpoint sums on a
uniform grid, and the profile of M_s comes from adaptive quadrature plus
root finding.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.integrate import quad, simpson
from scipy.optimize import brentq

from .exceptions import ValidationError

FD_STEP = 2e-4
CHEBYSHEV_DEGREE = 128

FieldClosure = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class OracleProfile:
    s: float
    d: float
    c1: Callable
    c2: Callable
    c1_dot: Callable
    c2_dot: Callable


@dataclass(frozen=True, eq=False)
class OracleGrid:
    """Uniform midpoint nodes in r and theta, a resolution factor finer than the main grid."""

    profile: OracleProfile
    factor: int
    r: np.ndarray
    theta: np.ndarray
    dr: float
    dtheta: float

    def mesh(self):
        return np.meshgrid(self.r, self.theta, indexing="ij")


def oracle_profile(s: float) -> OracleProfile:
    s = float(s)
    if s == 1.0:
        return OracleProfile(
            s=s,
            d=math.pi / 2,
            c1=np.cos,
            c2=np.sin,
            c1_dot=lambda r: -np.sin(r),
            c2_dot=np.cos,
        )

    def speed(xi):
        return math.sqrt(math.cos(xi) ** 2 + (s * math.sin(xi)) ** 2)

    def arc(phi):
        return quad(speed, 0.0, phi, epsabs=1e-15, epsrel=1e-14, limit=200)[0]

    d = arc(math.pi / 2)

    def latitude(r):
        return brentq(lambda phi: arc(phi) - r, -math.pi / 2, math.pi / 2, xtol=1e-15, rtol=1e-15)

    phi_of_r = Chebyshev.interpolate(np.vectorize(latitude), CHEBYSHEV_DEGREE, domain=[-d, d])

    def rho(phi):
        return np.sqrt(np.cos(phi) ** 2 + (s * np.sin(phi)) ** 2)

    return OracleProfile(
        s=s,
        d=d,
        c1=lambda r: s * np.cos(phi_of_r(r)),
        c2=lambda r: np.sin(phi_of_r(r)),
        c1_dot=lambda r: -s * np.sin(phi_of_r(r)) / rho(phi_of_r(r)),
        c2_dot=lambda r: np.cos(phi_of_r(r)) / rho(phi_of_r(r)),
    )


def build_oracle_grid(s: float, n_r: int, n_theta: int, factor: int = 2, profile=None) -> OracleGrid:
    if factor < 2:
        raise ValidationError("Oracle grid must be at least twice as fine as the main grid")
    profile = profile or oracle_profile(s)
    nr, nt = factor * n_r, factor * n_theta
    dr = 2.0 * profile.d / nr
    dtheta = 2.0 * math.pi / nt
    return OracleGrid(
        profile=profile,
        factor=factor,
        r=-profile.d + (np.arange(nr) + 0.5) * dr,
        theta=-math.pi + (np.arange(nt) + 0.5) * dtheta,
        dr=dr,
        dtheta=dtheta,
    )


def _diff_r(f, r, t, h=FD_STEP):
    return (np.asarray(f(r + h, t)) - np.asarray(f(r - h, t))) / (2.0 * h)


def _diff_t(f, r, t, h=FD_STEP):
    return (np.asarray(f(r, t + h)) - np.asarray(f(r, t - h))) / (2.0 * h)


def stream_closure(psi: Callable, profile: OracleProfile) -> FieldClosure:
    """Field (d_theta psi / c1, -d_r psi / c1) by finite differences."""

    def field(r, t):
        c1 = profile.c1(r)
        return _diff_t(psi, r, t) / c1, -_diff_r(psi, r, t) / c1

    return field


def oracle_bracket(X: FieldClosure, Y: FieldClosure) -> FieldClosure:
    def bracket(r, t):
        x1, x2 = X(r, t)
        y1, y2 = Y(r, t)
        dx_r, dx_t = _diff_r(X, r, t), _diff_t(X, r, t)
        dy_r, dy_t = _diff_r(Y, r, t), _diff_t(Y, r, t)
        return (
            x1 * dy_r[0] + x2 * dy_t[0] - y1 * dx_r[0] - y2 * dx_t[0],
            x1 * dy_r[1] + x2 * dy_t[1] - y1 * dx_r[1] - y2 * dx_t[1],
        )

    return bracket


def oracle_integrate(grid: OracleGrid, values) -> float:
    """Midpoint sum of values * c1 dr dtheta."""
    R, _ = grid.mesh()
    return float(np.sum(np.asarray(values) * grid.profile.c1(R)) * grid.dr * grid.dtheta)


def oracle_inner(X: FieldClosure, Y: FieldClosure, grid: OracleGrid) -> float:
    R, T = grid.mesh()
    x1, x2 = X(R, T)
    y1, y2 = Y(R, T)
    return oracle_integrate(grid, x1 * y1 + grid.profile.c1(R) ** 2 * x2 * y2)


def oracle_mc_base(X: FieldClosure, Y: FieldClosure, grid: OracleGrid) -> float:
    W = oracle_bracket(X, Y)
    V = oracle_bracket(W, Y)
    return -oracle_inner(W, W, grid) - oracle_inner(X, V, grid)


def oracle_mc_scale(X: FieldClosure, Y: FieldClosure, grid: OracleGrid) -> float:
    W = oracle_bracket(X, Y)
    return oracle_inner(W, W, grid) + abs(oracle_inner(X, oracle_bracket(W, Y), grid))


def oracle_omega(X: FieldClosure, Y: FieldClosure, grid: OracleGrid) -> float:
    R, T = grid.mesh()
    x1, x2 = X(R, T)
    y1, y2 = Y(R, T)
    p = grid.profile
    return oracle_integrate(grid, p.c2(R) * p.c1(R) * (x2 * y1 - x1 * y2))


def oracle_divergence(u: FieldClosure, grid: OracleGrid) -> np.ndarray:
    R, T = grid.mesh()
    c1 = grid.profile.c1

    def flux(r, t):
        return c1(r) * u(r, t)[0]

    def u2(r, t):
        return u(r, t)[1]

    return _diff_r(flux, R, T) / c1(R) + _diff_t(u2, R, T)


def oracle_laplacian(f: Callable, grid: OracleGrid) -> np.ndarray:
    R, T = grid.mesh()
    return oracle_laplacian_at(f, grid.profile, R, T)


def oracle_laplacian_at(f: Callable, profile: OracleProfile, R, T) -> np.ndarray:
    """Laplace-Beltrami (1/c1) d_r(c1 d_r f) + c1^-2 d_theta^2 f at arbitrary points."""
    R = np.asarray(R, dtype=float)
    T = np.asarray(T, dtype=float)
    c1 = profile.c1

    def radial_flux(r, t):
        return c1(r) * _diff_r(f, r, t)

    def f_theta(r, t):
        return _diff_t(f, r, t)

    return _diff_r(radial_flux, R, T) / c1(R) + _diff_t(f_theta, R, T) / c1(R) ** 2


def oracle_second_variation(mc: float, y_norm: float, s_tilde: float, samples: int = 4097) -> float:
    """Composite Simpson value of the second variation along sin(t sqrt(mc/s)/||Y||)."""
    for name, value in (("mc", mc), ("y_norm", y_norm), ("s_tilde", s_tilde)):
        if not (math.isfinite(value) and value > 0.0):
            raise ValidationError(f"{name} must be positive, got {value}")
    rate = math.sqrt(mc / s_tilde) / y_norm
    t = np.linspace(0.0, math.pi / rate, samples)
    f = np.sin(rate * t)
    f_dot = rate * np.cos(rate * t)
    return float(simpson(f_dot**2 * y_norm**2 - f**2 * mc, x=t))

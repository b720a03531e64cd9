"""
Profile, metric and quadrature machinery for the surfaces M_s.

M_s is x^2 + y^2 = s^2 (1 - z^2), parameterized by arc length r in (-d, d)
along a meridian and longitude theta in [-pi, pi). The metric is
dr^2 + c1(r)^2 dtheta^2 and the area form is c1 dtheta dr.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import ellipeinc

from .exceptions import GridMismatchError, ProfileError, ValidationError

logger = logging.getLogger(__name__)

PROFILE_TOLERANCE = 1e-10
NEWTON_TOLERANCE = 1e-12
NEWTON_MAX_ITER = 50
MIN_RADIAL_NODES = 16
MIN_THETA_NODES = 8


@dataclass(frozen=True, eq=False)
class SurfaceProfile:
    """Arc-length profile (c1, c2) of M_s sampled on mapped Gauss-Legendre nodes."""

    s: float
    d: float
    r_nodes: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    c1_dot: np.ndarray
    c2_dot: np.ndarray
    quad_weights_r: np.ndarray
    diff_matrix: np.ndarray = field(repr=False)

    @property
    def n_r(self) -> int:
        return int(self.r_nodes.size)

    def invariant_residuals(self) -> Dict[str, float]:
        return {
            "unit_speed": float(np.max(np.abs(self.c1_dot**2 + self.c2_dot**2 - 1.0))),
            "surface_equation": float(
                np.max(np.abs(self.c1**2 - self.s**2 * (1.0 - self.c2**2))) / self.s**2
            ),
            "equatorial_symmetry": float(np.max(np.abs(self.c2 + self.c2[::-1]))),
        }

    def area(self) -> float:
        return float(2.0 * np.pi * np.dot(self.quad_weights_r, self.c1))


@dataclass(frozen=True)
class ChristoffelTable:
    """Nonzero Levi-Civita symbols of dr^2 + c1^2 dtheta^2."""

    gamma_r_tt: np.ndarray
    gamma_t_rt: np.ndarray


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor grid: profile nodes in r times uniform periodic nodes in theta."""

    profile: SurfaceProfile
    n_theta: int
    theta: np.ndarray
    delta_theta: float
    wavenumbers: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return (self.profile.n_r, self.n_theta)

    @property
    def s(self) -> float:
        return self.profile.s

    @property
    def d(self) -> float:
        return self.profile.d

    @property
    def n_r(self) -> int:
        return self.profile.n_r

    def same_as(self, other: "Grid") -> bool:
        if self is other:
            return True
        return (
            self.profile.s == other.profile.s
            and self.n_r == other.n_r
            and self.n_theta == other.n_theta
        )

    def check_shape(self, values: np.ndarray, name: str = "array") -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != self.shape:
            raise GridMismatchError(
                f"{name} has shape {values.shape}, grid expects {self.shape}"
            )
        return values

    def describe(self) -> Dict[str, float]:
        return {"s": self.s, "d": self.d, "n_r": self.n_r, "n_theta": self.n_theta}


def _arc_length(phi, s: float) -> np.ndarray:
    # r(phi) = E(phi | 1 - s^2); odd in phi
    phi = np.asarray(phi, dtype=float)
    return np.sign(phi) * ellipeinc(np.abs(phi), 1.0 - s * s)


def _speed(phi, s: float) -> np.ndarray:
    return np.sqrt(np.cos(phi) ** 2 + (s * np.sin(phi)) ** 2)


def _invert_latitude(s: float, x: np.ndarray):
    """Latitudes phi with r(phi) = d * x, plus the half-length d = r(pi/2)."""
    d = float(_arc_length(np.pi / 2, s))
    targets = d * x

    table_phi = np.linspace(-np.pi / 2, np.pi / 2, 8 * x.size + 1)
    table_r = _arc_length(table_phi, s)
    if not np.all(np.diff(table_r) > 0.0):
        raise ProfileError(f"Arc-length table for s={s} is not monotone")

    phi = PchipInterpolator(table_r, table_phi)(targets)
    for _ in range(NEWTON_MAX_ITER):
        step = (_arc_length(phi, s) - targets) / _speed(phi, s)
        phi = phi - step
        if np.max(np.abs(step)) < NEWTON_TOLERANCE:
            break
    else:
        raise ProfileError(
            f"Latitude inversion for s={s} did not converge in {NEWTON_MAX_ITER} Newton steps"
        )
    if not np.all(np.diff(phi) > 0.0):
        raise ProfileError(f"Latitude inversion for s={s} is not monotone")
    return d, phi


def legendre_diff_matrix(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Barycentric differentiation matrix on Gauss-Legendre nodes of [-1, 1]."""
    n = x.size
    lam = np.sqrt((1.0 - x**2) * w)
    lam[1::2] *= -1.0
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (lam[None, :] / lam[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    D[np.diag_indices(n)] = -D.sum(axis=1)
    return D


def _check_invariants(profile: SurfaceProfile) -> None:
    residuals = profile.invariant_residuals()
    for name, value in residuals.items():
        if not value <= PROFILE_TOLERANCE:
            raise ProfileError(
                f"Profile for s={profile.s} violates {name}: residual {value:.3e}"
            )
    if not (np.all(profile.c1 > 0.0) and np.all(profile.c2_dot > 0.0)):
        raise ProfileError(f"Profile for s={profile.s} is not positively oriented")


def build_profile(s: float, n_r: int) -> SurfaceProfile:
    """
    Build the arc-length profile of M_s on n_r mapped Gauss-Legendre nodes.

    For s != 1 the latitude substitution c2 = sin(phi), c1 = s cos(phi) is
    used, with r(phi) an incomplete elliptic integral of the second kind,
    inverted by a monotone cubic guess refined with Newton's method.

    Args:
        s (float): Shape parameter, s >= 1
        n_r (int): Radial node count, at least 16

    Returns:
        SurfaceProfile: Profile samples, quadrature weights and r-derivative matrix

    Raises:
        ValidationError: If s < 1 or n_r is too small
        ProfileError: If the inversion fails or the invariants do not hold
    """
    s = float(s)
    if not math.isfinite(s) or s < 1.0:
        raise ValidationError(f"Shape parameter s must be a finite number >= 1, got {s}")
    if int(n_r) != n_r or n_r < MIN_RADIAL_NODES:
        raise ValidationError(f"n_r must be an integer >= {MIN_RADIAL_NODES}, got {n_r}")
    n_r = int(n_r)

    x, w = np.polynomial.legendre.leggauss(n_r)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])

    if s == 1.0:
        d = np.pi / 2
        r = d * x
        c1, c2 = np.cos(r), np.sin(r)
        c1_dot, c2_dot = -np.sin(r), np.cos(r)
    else:
        d, phi = _invert_latitude(s, x)
        r = d * x
        rho = _speed(phi, s)
        c1, c2 = s * np.cos(phi), np.sin(phi)
        c1_dot, c2_dot = -s * np.sin(phi) / rho, np.cos(phi) / rho

    profile = SurfaceProfile(
        s=s,
        d=float(d),
        r_nodes=r,
        c1=c1,
        c2=c2,
        c1_dot=c1_dot,
        c2_dot=c2_dot,
        quad_weights_r=d * w,
        diff_matrix=legendre_diff_matrix(x, w) / d,
    )
    _check_invariants(profile)
    logger.debug(f"Built profile s={s}, n_r={n_r}, d={profile.d:.15g}")
    return profile


def build_grid(
    s: float, n_r: int, n_theta: int, profile: Optional[SurfaceProfile] = None
) -> Grid:
    if int(n_theta) != n_theta or n_theta < MIN_THETA_NODES or n_theta % 2:
        raise ValidationError(
            f"n_theta must be an even integer >= {MIN_THETA_NODES}, got {n_theta}"
        )
    n_theta = int(n_theta)
    if profile is None:
        profile = build_profile(s, n_r)
    elif profile.s != float(s) or profile.n_r != n_r:
        raise GridMismatchError("Supplied profile does not match (s, n_r)")

    wavenumbers = np.arange(n_theta // 2 + 1, dtype=float)
    wavenumbers[-1] = 0.0  # Nyquist mode has no real derivative
    return Grid(
        profile=profile,
        n_theta=n_theta,
        theta=-np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta,
        delta_theta=2.0 * np.pi / n_theta,
        wavenumbers=wavenumbers,
    )


def christoffel(p: SurfaceProfile) -> ChristoffelTable:
    return ChristoffelTable(gamma_r_tt=-p.c1 * p.c1_dot, gamma_t_rt=p.c1_dot / p.c1)


def support_margin(p: SurfaceProfile, fraction: float) -> float:
    """Absolute margin delta = fraction * d, validated to leave a nonempty band."""
    if not 0.0 < fraction < 1.0:
        raise ValidationError(f"Support margin fraction must lie in (0, 1), got {fraction}")
    return float(fraction) * p.d


def integrate_scalar(grid: Grid, f) -> float:
    """Integral of f against the area form c1 dtheta dr (trapezoid in theta, Gauss in r)."""
    f = grid.check_shape(f, "integrand")
    p = grid.profile
    return float(grid.delta_theta * np.dot(p.quad_weights_r * p.c1, f.sum(axis=1)))

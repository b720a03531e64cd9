"""
Tangent vector fields on M_s in the coordinate frame (d/dr, d/dtheta).

A field X = X1 d/dr + X2 d/dtheta is stored as two (n_r, n_theta) arrays;
the physical longitudinal speed is c1 * X2. Theta derivatives are spectral
(rfft), r derivatives use the profile's collocation matrix.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import GridMismatchError, ResolutionError, ValidationError
from .surface import Grid, christoffel, integrate_scalar, support_margin

logger = logging.getLogger(__name__)

PROJECTION_TOLERANCE = 1e-10
SUPPORT_FRACTION = 0.1


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid
    comp_r: np.ndarray
    comp_theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "comp_r", self.grid.check_shape(self.comp_r, "comp_r"))
        object.__setattr__(
            self, "comp_theta", self.grid.check_shape(self.comp_theta, "comp_theta")
        )

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    def _other(self, other) -> "VectorField":
        if not self.grid.same_as(other.grid):
            raise GridMismatchError("Vector fields live on different grids")
        return other

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        other = self._other(other)
        return VectorField(self.grid, self.comp_r + other.comp_r, self.comp_theta + other.comp_theta)

    def __sub__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        other = self._other(other)
        return VectorField(self.grid, self.comp_r - other.comp_r, self.comp_theta - other.comp_theta)

    def __neg__(self):
        return VectorField(self.grid, -self.comp_r, -self.comp_theta)

    def __mul__(self, factor):
        if isinstance(factor, VectorField):
            return NotImplemented
        factor = float(factor)
        return VectorField(self.grid, factor * self.comp_r, factor * self.comp_theta)

    __rmul__ = __mul__

    def __truediv__(self, divisor):
        return self * (1.0 / float(divisor))

    def physical_max(self) -> float:
        """Largest pointwise speed component (|X1| or |c1 X2|)."""
        c1 = self.grid.profile.c1[:, None]
        return float(max(np.max(np.abs(self.comp_r)), np.max(np.abs(c1 * self.comp_theta))))


@dataclass(frozen=True, eq=False)
class StreamFunction:
    grid: Grid
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi", self.grid.check_shape(self.psi, "psi"))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable) -> "StreamFunction":
        """Sample psi(r, theta) on the grid nodes."""
        R, T = np.meshgrid(grid.profile.r_nodes, grid.theta, indexing="ij")
        return cls(grid, np.asarray(func(R, T), dtype=float))


@dataclass(frozen=True, eq=False)
class ZonalSpec:
    """Zonal flow Z = F(r) d/dtheta; F sampled on the radial nodes."""

    grid: Grid
    F: np.ndarray
    delta: float
    west_facing: bool = True
    label: str = "custom"

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        if F.shape != (self.grid.n_r,):
            raise GridMismatchError(f"F has shape {F.shape}, expected ({self.grid.n_r},)")
        object.__setattr__(self, "F", F)

    def support_mask(self) -> np.ndarray:
        return np.abs(self.grid.profile.r_nodes) < self.grid.d - self.delta


def _same_grid(*fields: VectorField) -> Grid:
    grid = fields[0].grid
    for other in fields[1:]:
        if not grid.same_as(other.grid):
            raise GridMismatchError("Vector fields live on different grids")
    return grid


def d_theta(grid: Grid, f) -> np.ndarray:
    spectrum = np.fft.rfft(np.asarray(f, dtype=float), axis=-1)
    return np.fft.irfft(1j * grid.wavenumbers * spectrum, n=grid.n_theta, axis=-1)


def d_r(grid: Grid, f) -> np.ndarray:
    return grid.profile.diff_matrix @ np.asarray(f, dtype=float)


def _along(X: VectorField, f: np.ndarray) -> np.ndarray:
    """Directional derivative X(f) of a grid function."""
    return X.comp_r * d_r(X.grid, f) + X.comp_theta * d_theta(X.grid, f)


def from_stream(psi: StreamFunction) -> VectorField:
    """u = (d_theta psi / c1) d/dr - (d_r psi / c1) d/dtheta, divergence-free by construction."""
    grid = psi.grid
    c1 = grid.profile.c1[:, None]
    return VectorField(grid, d_theta(grid, psi.psi) / c1, -d_r(grid, psi.psi) / c1)


def divergence(u: VectorField) -> np.ndarray:
    # conservative form of (d_r + c1'/c1) u1 + d_theta u2
    grid = u.grid
    c1 = grid.profile.c1[:, None]
    return d_r(grid, c1 * u.comp_r) / c1 + d_theta(grid, u.comp_theta)


def inner(X: VectorField, Y: VectorField) -> float:
    grid = _same_grid(X, Y)
    c1 = grid.profile.c1[:, None]
    return integrate_scalar(grid, X.comp_r * Y.comp_r + c1**2 * X.comp_theta * Y.comp_theta)


def norm(X: VectorField) -> float:
    return float(np.sqrt(max(inner(X, X), 0.0)))


def divergence_residual(u: VectorField) -> float:
    """Dimensionless d * ||div u|| / ||u||; zero for the zero field."""
    size = norm(u)
    if size == 0.0:
        return 0.0
    div = divergence(u)
    return float(u.grid.d * np.sqrt(max(integrate_scalar(u.grid, div**2), 0.0)) / size)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    grid = _same_grid(X, Y)
    return VectorField(
        grid,
        _along(X, Y.comp_r) - _along(Y, X.comp_r),
        _along(X, Y.comp_theta) - _along(Y, X.comp_theta),
    )


def hodge_star(u: VectorField) -> VectorField:
    c1 = u.grid.profile.c1[:, None]
    return VectorField(u.grid, c1 * u.comp_theta, -u.comp_r / c1)


def covariant_derivative(X: VectorField, Y: VectorField) -> VectorField:
    """Levi-Civita derivative nabla_X Y."""
    grid = _same_grid(X, Y)
    table = christoffel(grid.profile)
    g_rtt = table.gamma_r_tt[:, None]
    g_trt = table.gamma_t_rt[:, None]
    return VectorField(
        grid,
        _along(X, Y.comp_r) + g_rtt * X.comp_theta * Y.comp_theta,
        _along(X, Y.comp_theta) + g_trt * (X.comp_r * Y.comp_theta + X.comp_theta * Y.comp_r),
    )


def gradient(grid: Grid, f) -> VectorField:
    f = grid.check_shape(f, "scalar")
    c1 = grid.profile.c1[:, None]
    return VectorField(grid, d_r(grid, f), d_theta(grid, f) / c1**2)


@dataclass(frozen=True, eq=False)
class _BandSystem:
    """Per-mode Cholesky factors of the weak Poisson problem on |r| < d - delta."""

    band: np.ndarray
    gradient_r: np.ndarray
    weights: np.ndarray
    matrices: tuple
    factors: tuple


def _edge_extension(band: np.ndarray) -> np.ndarray:
    """Maps band values to every node; nodes outside copy the nearest band edge."""
    index = np.flatnonzero(band)
    nearest = np.clip(np.arange(band.size), index[0], index[-1])
    return (nearest[:, None] == index[None, :]).astype(float)


@lru_cache(maxsize=16)
def _band_system(grid: Grid, delta: float) -> _BandSystem:
    p = grid.profile
    band = np.abs(p.r_nodes) < p.d - delta
    if np.count_nonzero(band) < 2:
        raise ResolutionError(f"Support band for delta = {delta} holds fewer than two radial nodes")
    G = (p.diff_matrix @ _edge_extension(band))[band]
    wc1 = (p.quad_weights_r * p.c1)[band]
    w_over_c1 = (p.quad_weights_r / p.c1)[band]
    stiffness = G.T @ (wc1[:, None] * G)
    gauge = wc1 / np.linalg.norm(wc1)
    gauge_term = (np.trace(stiffness) / gauge.size) * np.outer(gauge, gauge)

    matrices, factors = [], []
    for j, k in enumerate(grid.wavenumbers):
        A = stiffness + np.diag(k * k * w_over_c1)
        if k == 0.0:
            # constants on the band carry no gradient
            A = A + gauge_term
        try:
            factors.append(cho_factor(A))
        except LinAlgError as e:
            raise ResolutionError(f"Projection matrix for theta mode {j} is not positive definite: {e}") from e
        matrices.append(A)
    logger.debug(f"Factored band projection: {gauge.size} of {p.n_r} radial nodes, delta={delta:.6g}")
    return _BandSystem(band, G, wc1, tuple(matrices), tuple(factors))


def _potential(W: VectorField, system: _BandSystem) -> np.ndarray:
    """Band potential f minimizing ||W - grad f|| over the band, one radial solve per theta mode."""
    grid = W.grid
    G, wc1 = system.gradient_r, system.weights
    W1 = np.fft.rfft(W.comp_r[system.band], axis=1)
    W2 = np.fft.rfft(W.comp_theta[system.band], axis=1)
    f_hat = np.zeros_like(W1)
    for j, k in enumerate(grid.wavenumbers):
        A = system.matrices[j]
        rhs = G.T @ (wc1 * W1[:, j]) - 1j * k * (wc1 * W2[:, j])
        B = np.column_stack([rhs.real, rhs.imag])
        solution = cho_solve(system.factors[j], B)
        backward = np.linalg.norm(A @ solution - B) / (
            np.linalg.norm(A) * np.linalg.norm(solution) + np.linalg.norm(B) + 1e-300
        )
        if not np.all(np.isfinite(solution)) or backward > PROJECTION_TOLERANCE:
            raise ResolutionError(
                f"Projection solve for theta mode {j} is unreliable (backward error {backward:.2e})"
            )
        f_hat[:, j] = solution[:, 0] + 1j * solution[:, 1]
    return np.fft.irfft(f_hat, n=grid.n_theta, axis=1)


def project(W: VectorField, delta: Optional[float] = None) -> VectorField:
    """
    L2-orthogonal projection onto divergence-free fields supported in |r| < d - delta.

    The gradient part grad f is removed on the band, where f solves the weak
    Poisson problem mode by mode in theta with zero-derivative conditions at
    the band edges; outside the band W is returned unchanged. The result is
    orthogonal (in the grid inner product) to the gradient of every band
    potential, so the map is idempotent.

    Args:
        W: Field to project, expected to vanish outside the band
        delta: Support margin; defaults to 0.1 d

    Raises:
        ValidationError: If delta leaves no band
        ResolutionError: If a per-mode solve breaks down
    """
    grid = W.grid
    if delta is None:
        delta = support_margin(grid.profile, SUPPORT_FRACTION)
    delta = float(delta)
    if not 0.0 <= delta < grid.d:
        raise ValidationError(f"Support margin must lie in [0, {grid.d:.6g}), got {delta}")
    system = _band_system(grid, delta)
    f = _potential(W, system)
    c1 = grid.profile.c1[system.band, None]
    correction_r = np.zeros(grid.shape)
    correction_theta = np.zeros(grid.shape)
    correction_r[system.band] = system.gradient_r @ f
    correction_theta[system.band] = d_theta(grid, f) / c1**2
    return W - VectorField(grid, correction_r, correction_theta)


def zonal(spec: ZonalSpec) -> VectorField:
    if spec.west_facing and np.any(spec.F > 0.0):
        raise ValidationError(f"Zonal flow '{spec.label}' is flagged west-facing but has F > 0")
    if np.any(spec.F[~spec.support_mask()] != 0.0):
        raise ValidationError(f"Zonal flow '{spec.label}' does not vanish outside the support band")
    grid = spec.grid
    comp_theta = np.repeat(spec.F[:, None], grid.n_theta, axis=1)
    return VectorField(grid, np.zeros(grid.shape), comp_theta)


def support_leakage(u: VectorField, delta: float) -> float:
    """Largest speed outside |r| < d - delta relative to the largest speed anywhere."""
    grid = u.grid
    peak = u.physical_max()
    if peak == 0.0:
        return 0.0
    outside = np.abs(grid.profile.r_nodes) >= grid.d - delta
    if not np.any(outside):
        return 0.0
    c1 = grid.profile.c1[outside, None]
    leak = max(
        np.max(np.abs(u.comp_r[outside])), np.max(np.abs(c1 * u.comp_theta[outside]))
    )
    return float(leak / peak)

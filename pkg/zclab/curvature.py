"""
Misiolek curvature on the volume-preserving diffeomorphism group of M_s and
on its central extension by the cocycle Omega(X, Y) = <B*X, Y>, B = z = c2.

All quantities are quadratures of grid fields built with ``zclab.fields``;
tolerances are relative to scales computed from the operands.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy.integrate import quad

from .exceptions import IdentityError, StationarityError, ValidationError
from .fields import (
    StreamFunction,
    VectorField,
    ZonalSpec,
    covariant_derivative,
    divergence_residual,
    from_stream,
    hodge_star,
    inner,
    lie_bracket,
    norm,
    project,
    zonal,
)
from .models import IdentityReport, MCReport
from .surface import integrate_scalar
from .utils import relative_residual, smooth_window

logger = logging.getLogger(__name__)

STATIONARITY_TOLERANCE = 1e-6
GAP_RTOL = 1e-8
GAP_FLOOR = 1e-10
DEGENERACY_THRESHOLD = 1e-6
COMPANION_SHARPNESS = 16.0


@dataclass(frozen=True, eq=False)
class ExtendedVector:
    """Element (X, a) of g + R."""

    field: VectorField
    scalar: float = 0.0


def _bracket_terms(X: VectorField, Y: VectorField):
    W = lie_bracket(X, Y)
    V = lie_bracket(W, Y)
    return W, inner(W, W), inner(X, V)


def mc_base(X: VectorField, Y: VectorField) -> float:
    """MC = -||[X,Y]||^2 - <X, [[X,Y],Y]>."""
    _, ww, xv = _bracket_terms(X, Y)
    return -ww - xv


def _nabla_form(X: VectorField, W: VectorField, Y: VectorField) -> float:
    return inner(covariant_derivative(X, W) + covariant_derivative(W, X), Y)


def stationarity_residual(X: VectorField, delta: Optional[float] = None) -> float:
    """||P(nabla_X X)|| / ||nabla_X X||; zero means X is a stationary Euler flow."""
    accel = covariant_derivative(X, X)
    size = norm(accel)
    if size == 0.0:
        return 0.0
    return norm(project(accel, delta)) / size


def mc_nabla(
    X: VectorField,
    Y: VectorField,
    check_stationarity: bool = True,
    threshold: float = STATIONARITY_TOLERANCE,
) -> float:
    """
    MC through the Levi-Civita connection: <nabla_X [X,Y] + nabla_[X,Y] X, Y>.

    Args:
        X: Flow the curvature is taken along; must be stationary
        Y: Perturbation
        check_stationarity (bool): Measure X's stationarity residual first
        threshold (float): Largest acceptable stationarity residual

    Raises:
        StationarityError: If X is not stationary; carries the computed value
    """
    value = _nabla_form(X, lie_bracket(X, Y), Y)
    if check_stationarity:
        residual = stationarity_residual(X)
        if residual > threshold:
            raise StationarityError(
                f"Flow is not stationary (residual {residual:.3e} > {threshold:.1e})",
                value=value,
                residual=residual,
            )
    return value


def cocycle_omega(X: VectorField, Y: VectorField) -> float:
    grid = X.grid
    p = grid.profile
    c1 = p.c1[:, None]
    c2 = p.c2[:, None]
    return integrate_scalar(grid, c2 * c1 * (X.comp_theta * Y.comp_r - X.comp_r * Y.comp_theta))


def _coriolis_field(X: VectorField) -> VectorField:
    """B * (star X) with B = c2."""
    star = hodge_star(X)
    c2 = X.grid.profile.c2[:, None]
    return VectorField(X.grid, c2 * star.comp_r, c2 * star.comp_theta)


def cocycle_omega_projected(X: VectorField, Y: VectorField, delta: Optional[float] = None) -> float:
    """<P(B star X), Y> with the projection taken on the band |r| < d - delta."""
    return inner(project(_coriolis_field(X), delta), Y)


def omega_zonal_closed_form(Z: ZonalSpec, Y: VectorField) -> float:
    """Integral of c1^2 Y1^2 F c2' dr dtheta, equal to Omega(Y, [Y, Z])."""
    p = Y.grid.profile
    weight = (p.c1 * Z.F * p.c2_dot)[:, None]
    return integrate_scalar(Y.grid, weight * Y.comp_r**2)


def extended_bracket(
    X: ExtendedVector, Y: ExtendedVector, omega: Optional[Callable[[VectorField, VectorField], float]] = None
) -> ExtendedVector:
    omega = cocycle_omega if omega is None else omega
    return ExtendedVector(lie_bracket(X.field, Y.field), omega(X.field, Y.field))


def extended_inner(X: ExtendedVector, Y: ExtendedVector) -> float:
    return inner(X.field, Y.field) + float(X.scalar) * float(Y.scalar)


def _extended_form(X: ExtendedVector, Y: ExtendedVector, delta: Optional[float]) -> float:
    """-||[X,Y]||^2 - <X, [[X,Y],Y]> on g + R, with Omega taken through the projection."""

    def omega(U: VectorField, V: VectorField) -> float:
        return cocycle_omega_projected(U, V, delta)

    B = extended_bracket(X, Y, omega)
    return -extended_inner(B, B) - extended_inner(X, extended_bracket(B, Y, omega))


def mc_extended(
    X: ExtendedVector,
    Y: ExtendedVector,
    params: Optional[Dict[str, Any]] = None,
    delta: Optional[float] = None,
) -> MCReport:
    """
    Misiolek curvature of the central extension along (X, a).

    MC_ext = MC - Omega(X,Y)^2 - a Omega([X,Y],Y); the scalar part b of Y
    does not enter. The value is re-evaluated from the extended bracket and
    inner product with the projected cocycle on |r| < d - delta.
    """
    a = float(X.scalar)
    Xf, Yf = X.field, Y.field
    W, ww, xv = _bracket_terms(Xf, Yf)
    base = -ww - xv
    omega_xy = cocycle_omega(Xf, Yf)
    omega_bracket = cocycle_omega(W, Yf)
    extended = base - omega_xy**2 - a * omega_bracket
    gap = -omega_xy**2 - a * omega_bracket
    nabla = _nabla_form(Xf, W, Yf)
    scale = ww + abs(xv)
    residuals = {
        "mc_nabla": relative_residual(base - nabla, scale),
        "mc_extended_identity": relative_residual(
            extended - _extended_form(X, Y, delta), scale + omega_xy**2 + abs(a * omega_bracket)
        ),
    }
    return MCReport(
        mc_base=base,
        mc_extended=extended,
        omega_xy=omega_xy,
        omega_bracket=omega_bracket,
        gap=gap,
        mc_nabla_crosscheck=nabla,
        a=a,
        residuals=residuals,
        grid=Xf.grid.describe(),
        params=dict(params or {}),
    )


def _gap_scale(Z: ZonalSpec, Y: VectorField) -> float:
    size = norm(Y)
    return float(Z.grid.s * np.max(np.abs(Z.F), initial=0.0) * size * size)


def gap_is_degenerate(Z: ZonalSpec, Y: VectorField, threshold: float = DEGENERACY_THRESHOLD) -> bool:
    """True when Y1 vanishes on supp F, so the extension adds nothing to MC."""
    return abs(omega_zonal_closed_form(Z, Y)) <= threshold * _gap_scale(Z, Y)


def theorem_main_gap(Z: ZonalSpec, a: float, Y: VectorField, rtol: float = GAP_RTOL) -> float:
    """
    Curvature gained by the extension along a west-facing zonal flow.

    The gap -Omega(Z,Y)^2 - a Omega([Z,Y],Y) is evaluated from the brackets
    and independently as -a times the zonal closed form; both must agree and
    be nonnegative.

    Raises:
        ValidationError: If a <= 0 or F > 0 somewhere
        IdentityError: If the two evaluations disagree or the gap is negative
    """
    a = float(a)
    if not a > 0.0:
        raise ValidationError(f"Coriolis parameter must be positive, got {a}")
    if np.any(Z.F > 0.0):
        raise ValidationError(f"Zonal flow '{Z.label}' is not west-facing")

    report = mc_extended(ExtendedVector(zonal(Z), a), ExtendedVector(Y, 0.0))
    direct = report.gap
    closed = -a * omega_zonal_closed_form(Z, Y)
    floor = GAP_FLOOR * a * _gap_scale(Z, Y)
    if abs(direct - closed) > rtol * max(abs(direct), abs(closed)) + floor:
        raise IdentityError(
            f"Gap evaluations disagree: brackets {direct:.17g}, closed form {closed:.17g}",
            expected=closed,
            actual=direct,
        )
    if direct < -floor:
        raise IdentityError(f"Negative gap {direct:.3e} for a west-facing flow", expected=closed, actual=direct)
    return direct


def _jacobi_terms(X: VectorField, Y: VectorField, Z: VectorField):
    return (
        cocycle_omega(lie_bracket(X, Y), Z),
        cocycle_omega(lie_bracket(Z, X), Y),
        cocycle_omega(lie_bracket(Y, Z), X),
    )


def jacobi_residual_omega(X: VectorField, Y: VectorField, Z: VectorField) -> float:
    return float(sum(_jacobi_terms(X, Y, Z)))


def euler_arnold_tendency(u: VectorField, a: float = 0.0) -> VectorField:
    """du/dt = P(-nabla_u u + a z (star u)), pressure removed by projection."""
    return project(-covariant_derivative(u, u) + float(a) * _coriolis_field(u))


def sectional_curvature(X: VectorField, Y: VectorField) -> float:
    """Sectional curvature of the plane (X, Y) at the identity for stationary X."""
    numerator = mc_base(X, Y) + norm(project(covariant_derivative(X, Y))) ** 2
    area = inner(X, X) * inner(Y, Y) - inner(X, Y) ** 2
    if not area > 0.0:
        raise ValidationError("Sectional curvature needs linearly independent fields")
    return numerator / area


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0.0):
            raise ValidationError(f"{name} must be a positive finite number, got {value}")


def second_variation_closed_form(mc: float, y_norm: float, s_tilde: float) -> float:
    """E'' = (pi/2)(1 - s) ||Y|| sqrt(MC / s) along the test profile sin(t sqrt(MC/s)/||Y||)."""
    _check_positive(mc=mc, y_norm=y_norm, s_tilde=s_tilde)
    return 0.5 * math.pi * (1.0 - s_tilde) * y_norm * math.sqrt(mc / s_tilde)


def conjugate_time(mc: float, y_norm: float, s_tilde: float) -> float:
    _check_positive(mc=mc, y_norm=y_norm, s_tilde=s_tilde)
    return math.pi * y_norm * math.sqrt(s_tilde / mc)


def second_variation_integral(
    mc: float, y_norm: float, f: Callable[[float], float], f_dot: Callable[[float], float], t_end: float
) -> float:
    """Integral of f'^2 ||Y||^2 - f^2 MC over [0, t_end] for a profile with f(0) = f(t_end) = 0."""
    _check_positive(y_norm=y_norm, t_end=t_end)
    value, _ = quad(
        lambda t: f_dot(t) ** 2 * y_norm**2 - f(t) ** 2 * mc, 0.0, t_end, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return float(value)


def _companion_field(Z: ZonalSpec) -> VectorField:
    """Fixed band-supported field completing (Z, Y) to a Jacobi triple."""
    grid = Z.grid
    half_width = grid.d - Z.delta
    r = grid.profile.r_nodes[:, None]
    theta = grid.theta[None, :]
    psi = smooth_window(r / half_width, COMPANION_SHARPNESS) * (np.cos(theta) + np.sin(2 * theta))
    return from_stream(StreamFunction(grid, psi))


def verify_all_identities(Z: ZonalSpec, a: float, Y: VectorField) -> IdentityReport:
    """
    Evaluate every identity along (Z, a) and a perturbation Y.

    Residuals are relative to operand scales; thresholds are applied by the
    caller through ``IdentityReport.failures``. The cocycle Jacobi identity is
    checked on (Z, Y, V) with a fixed companion field V.
    """
    a = float(a)
    if not (math.isfinite(a) and a >= 0.0):
        raise ValidationError(f"Coriolis parameter must be a finite number >= 0, got {a}")
    X = zonal(Z)
    report = mc_extended(ExtendedVector(X, a), ExtendedVector(Y, 0.0), delta=Z.delta)

    W = lie_bracket(Y, X)
    V = _companion_field(Z)
    norm_x, norm_y, norm_w = norm(X), norm(Y), norm(W)
    natural = _gap_scale(Z, Y)

    closed = omega_zonal_closed_form(Z, Y)
    omega_yw = cocycle_omega(Y, W)
    gap_closed = -a * closed
    terms = _jacobi_terms(X, Y, V)
    jacobi_floor = DEGENERACY_THRESHOLD * norm_x * norm_y * norm(V) / Z.grid.d

    residuals = {
        "mc_nabla": report.residuals["mc_nabla"],
        "mc_extended_identity": report.residuals["mc_extended_identity"],
        "omega_zonal": relative_residual(report.omega_xy, norm_x * norm_y),
        "omega_closed_form": relative_residual(
            omega_yw - closed, max(abs(omega_yw), abs(closed), DEGENERACY_THRESHOLD * natural)
        ),
        "gap_closed_form": relative_residual(
            report.gap - gap_closed,
            max(abs(report.gap), abs(gap_closed), DEGENERACY_THRESHOLD * a * natural),
        ),
        "jacobi": relative_residual(sum(terms), max(sum(abs(t) for t in terms), jacobi_floor)),
        "stationarity": stationarity_residual(X, Z.delta),
        "omega_projection": relative_residual(
            omega_yw - cocycle_omega_projected(Y, W, Z.delta), norm_y * norm_w
        ),
        "divergence": divergence_residual(Y),
    }
    flags = {"degenerate_gap": gap_is_degenerate(Z, Y)}
    logger.debug(f"Identity residuals: {residuals}")
    return IdentityReport(residuals=residuals, flags=flags, grid=Z.grid.describe())

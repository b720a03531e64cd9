"""
Search for perturbations with positive Misiolek curvature, and parameter scans.

Perturbations are stream-function families
psi(r, theta) = sum_{m,k} [alpha_mk cos(m theta) + beta_mk sin(m theta)] g_k(r)
with smooth band-wide radial profiles g_k. Every objective evaluation goes
through ``curvature.mc_extended`` on the normalized field (||Y|| = 1).
"""

import asyncio
import itertools
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Legendre
from scipy.optimize import minimize

from .curvature import ExtendedVector, mc_extended
from .exceptions import ValidationError, ZclError
from .fields import StreamFunction, VectorField, ZonalSpec, from_stream, norm, zonal
from .models import MCReport, RowStatus, ScanResult, ScanRow, SearchResult
from .surface import Grid, build_grid, support_margin
from .templates import create_template
from .utils import AsyncEvaluator, smooth_window

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 8
DEFAULT_POSITIVITY = 1e-12
BASIS_SHARPNESS = 16.0


def _radial_profiles(r, half_width: float, sharpness: float, count: int) -> np.ndarray:
    t = np.asarray(r, dtype=float) / half_width
    window = smooth_window(t, sharpness)
    return np.array([Legendre.basis(k)(t) * window for k in range(count)])


@dataclass(frozen=True, eq=False)
class PerturbationFamily:
    """Band-supported stream functions spanned by (m, k) cos/sin pairs."""

    grid: Grid
    m_list: Tuple[int, ...]
    half_width: float
    sharpness: float
    radial_basis: np.ndarray = dataclass_field(repr=False)

    @classmethod
    def default(
        cls,
        grid: Grid,
        m_list: Sequence[int],
        radial_count: int = 4,
        delta: Optional[float] = None,
        sharpness: float = BASIS_SHARPNESS,
    ) -> "PerturbationFamily":
        """
        Overlapping band-wide profiles g_k(r) = P_k(t) W(t), t = r / (d - delta).

        W is the smooth window and P_k the Legendre polynomials of degree
        0 .. radial_count - 1. Every profile spans the whole support band, so
        products of two members stay resolved at the reference resolution.
        """
        m_list = tuple(int(m) for m in m_list)
        if not m_list:
            raise ValidationError("Perturbation family needs at least one wavenumber")
        if any(m < 0 or m >= grid.n_theta // 2 for m in m_list):
            raise ValidationError(
                f"Wavenumbers must lie in [0, {grid.n_theta // 2}), got {list(m_list)}"
            )
        if int(radial_count) != radial_count or radial_count < 1:
            raise ValidationError(f"radial_count must be a positive integer, got {radial_count}")
        if delta is None:
            delta = support_margin(grid.profile, 0.1)
        half_width = float(grid.d - delta)
        basis = _radial_profiles(grid.profile.r_nodes, half_width, float(sharpness), int(radial_count))
        return cls(grid, m_list, half_width, float(sharpness), basis)

    @property
    def radial_count(self) -> int:
        return int(self.radial_basis.shape[0])


    @property
    def n_coefficients(self) -> int:
        return 2 * self.radial_count * len(self.m_list)

    def _split(self, coefficients) -> np.ndarray:
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (self.n_coefficients,):
            raise ValidationError(
                f"Expected {self.n_coefficients} coefficients, got shape {coefficients.shape}"
            )
        return coefficients.reshape(len(self.m_list), self.radial_count, 2)

    def psi(self, coefficients) -> StreamFunction:
        c = self._split(coefficients)
        theta = self.grid.theta[None, :]
        values = np.zeros(self.grid.shape)
        for i, m in enumerate(self.m_list):
            cos_part = c[i, :, 0] @ self.radial_basis
            sin_part = c[i, :, 1] @ self.radial_basis
            values += cos_part[:, None] * np.cos(m * theta) + sin_part[:, None] * np.sin(m * theta)
        return StreamFunction(self.grid, values)

    def psi_function(self, coefficients) -> Callable:
        """The same psi as a closure over (r, theta), for off-grid evaluation."""
        c = self._split(coefficients).copy()
        m_list, count = self.m_list, self.radial_count
        half_width, sharpness = self.half_width, self.sharpness

        def psi(r, theta):
            r = np.asarray(r, dtype=float)
            theta = np.asarray(theta, dtype=float)
            profiles = _radial_profiles(r, half_width, sharpness, count)
            total = np.zeros(np.broadcast(r, theta).shape)
            for i, m in enumerate(m_list):
                for k, g in enumerate(profiles):
                    total = total + g * (c[i, k, 0] * np.cos(m * theta) + c[i, k, 1] * np.sin(m * theta))
            return total

        return psi

    def field(self, coefficients) -> VectorField:
        return from_stream(self.psi(coefficients))

    def describe(self) -> dict:
        return {
            "m": list(self.m_list),
            "radial_count": self.radial_count,
            "half_width": self.half_width,
            "sharpness": self.sharpness,
        }


def evaluate_coefficients(
    family: PerturbationFamily, X: VectorField, a: float, coefficients
) -> Optional[MCReport]:
    """mc_extended along (X, a) for the normalized family member; None for the zero field."""
    Y = family.field(coefficients)
    size = norm(Y)
    if not (size > 0.0 and math.isfinite(size)):
        return None
    delta = family.grid.d - family.half_width
    return mc_extended(ExtendedVector(X, a), ExtendedVector(Y / size, 0.0), delta=delta)


class _RestartObjective:
    """Negated mc_extended with a hard evaluation allowance and best-point tracking."""

    def __init__(self, family, X, a, allowance):
        self.family = family
        self.X = X
        self.a = a
        self.allowance = allowance
        self.calls = 0
        self.best_value = -np.inf
        self.best_coefficients = None
        self.best_report = None

    def __call__(self, coefficients):
        if self.calls >= self.allowance:
            return np.inf
        self.calls += 1
        report = evaluate_coefficients(self.family, self.X, self.a, coefficients)
        if report is None or not math.isfinite(report.mc_extended):
            return np.inf
        if report.mc_extended > self.best_value:
            self.best_value = report.mc_extended
            self.best_coefficients = np.array(coefficients, dtype=float)
            self.best_report = report
        return -report.mc_extended


def _run_restart(family, X, a, start, allowance) -> _RestartObjective:
    objective = _RestartObjective(family, X, a, allowance)
    if allowance > 0:
        minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"maxfev": allowance, "adaptive": True, "xatol": 1e-10, "fatol": 1e-16},
        )
    return objective


def _allowances(budget: int, restarts: int) -> List[int]:
    base, extra = divmod(budget, restarts)
    return [base + (1 if i < extra else 0) for i in range(restarts)]


async def find_positive_mc_async(
    Z: ZonalSpec,
    a: float,
    family: PerturbationFamily,
    budget: int,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
    positivity: float = DEFAULT_POSITIVITY,
    evaluator: Optional[AsyncEvaluator] = None,
) -> SearchResult:
    if int(budget) != budget or budget < 0:
        raise ValidationError(f"Search budget must be a nonnegative integer, got {budget}")
    if int(restarts) != restarts or restarts < 1:
        raise ValidationError(f"Restart count must be a positive integer, got {restarts}")
    if not family.grid.same_as(Z.grid):
        raise ValidationError("Perturbation family and zonal flow use different grids")
    budget, restarts, seed = int(budget), int(restarts), int(seed)

    X = zonal(Z)
    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((restarts, family.n_coefficients))
    allowances = _allowances(budget, restarts)
    evaluator = evaluator or AsyncEvaluator()

    tasks = [
        evaluator.evaluate(_run_restart, family, X, float(a), starts[i], allowances[i], label=f"restart {i}")
        for i in range(restarts)
    ]
    outcomes = await evaluator.run(tasks)

    best = None
    summaries = []
    for i, outcome in enumerate(outcomes):
        if isinstance(outcome, Exception):
            raise outcome
        summaries.append({
            "index": i,
            "evaluations": outcome.calls,
            "best_mc_extended": None if outcome.best_report is None else outcome.best_value,
        })
        logger.info(f"Restart {i}: {outcome.calls} evaluations, best {outcome.best_value:.6e}")
        # strict comparison keeps the lowest index on ties
        if outcome.best_report is not None and (best is None or outcome.best_value > best.best_value):
            best = outcome

    evaluations = sum(s["evaluations"] for s in summaries)
    metadata = {
        "a": float(a),
        "budget": budget,
        "restarts": restarts,
        "zonal": Z.label,
        "family": family.describe(),
        "grid": family.grid.describe(),
    }
    if best is None:
        return SearchResult(None, None, None, evaluations, seed, False, summaries, metadata)
    return SearchResult(
        best_coefficients=best.best_coefficients.tolist(),
        best_mc_extended=best.best_report.mc_extended,
        best_mc_base=best.best_report.mc_base,
        evaluations=evaluations,
        seed=seed,
        converged=bool(best.best_report.mc_extended > positivity),
        restarts=summaries,
        metadata=metadata,
    )


def find_positive_mc(
    Z: ZonalSpec,
    a: float,
    family: PerturbationFamily,
    budget: int,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
    positivity: float = DEFAULT_POSITIVITY,
) -> SearchResult:
    """
    Maximize mc_extended over normalized family members with restarted Nelder-Mead.

    Restart starting points are drawn up front from ``default_rng(seed)``; the
    budget is split across restarts and never exceeded. ``converged`` is True
    iff the best value exceeds the positivity floor.

    Args:
        Z: Zonal flow the curvature is taken along
        a (float): Coriolis parameter
        family: Perturbation search space
        budget (int): Total objective evaluations over all restarts
        seed (int): RNG seed
        restarts (int): Number of Nelder-Mead restarts
        positivity (float): Values at or below this count as not positive

    Returns:
        SearchResult: Best coefficients and curvature values
    """
    return asyncio.run(
        find_positive_mc_async(Z, a, family, budget, seed, restarts=restarts, positivity=positivity)
    )


@dataclass(frozen=True)
class ScanSpec:
    """Axes and shared settings of a parameter scan."""

    s: Sequence[float] = ()
    a: Sequence[float] = ()
    templates: Sequence[str] = ()
    m: Sequence[int] = ()
    n_r: int = 129
    n_theta: int = 128
    delta_fraction: float = 0.1
    amplitude: float = -0.005
    sharpness: Optional[float] = None
    template_path: str = ""
    west_facing: bool = True
    radial_count: int = 4
    seed: int = 42
    positivity: float = DEFAULT_POSITIVITY

    def points(self):
        return list(itertools.product(self.s, self.a, self.templates, self.m))


@lru_cache(maxsize=16)
def _cached_grid(s: float, n_r: int, n_theta: int) -> Grid:
    return build_grid(s, n_r, n_theta)


def build_scan_case(spec: ScanSpec, s: float, template: str, m: int):
    """Zonal flow and normalized single-mode perturbation for one scan tuple."""
    grid = _cached_grid(float(s), spec.n_r, spec.n_theta)
    delta = support_margin(grid.profile, spec.delta_fraction)
    Z = create_template(
        template, spec.amplitude, sharpness=spec.sharpness, path=spec.template_path
    ).build(grid, delta, west_facing=spec.west_facing)
    family = PerturbationFamily.default(grid, [m], spec.radial_count, delta=delta)
    coefficients = np.random.default_rng([int(spec.seed), int(m)]).standard_normal(family.n_coefficients)
    Y = family.field(coefficients)
    size = norm(Y)
    if not size > 0.0:
        raise ValidationError(f"Perturbation for m={m} is identically zero")
    return Z, Y / size


def _scan_row(spec: ScanSpec, s: float, a: float, template: str, m: int) -> ScanRow:
    Z, Y = build_scan_case(spec, s, template, m)
    report = mc_extended(ExtendedVector(zonal(Z), float(a)), ExtendedVector(Y, 0.0), delta=Z.delta)
    return ScanRow(
        s=float(s),
        a=float(a),
        m=int(m),
        F_id=Z.label,
        mc_base=report.mc_base,
        mc_extended=report.mc_extended,
        gap=report.gap,
        omega_xy=report.omega_xy,
        converged=bool(report.mc_extended > spec.positivity),
        seed=int(spec.seed),
    )


async def scan_async(spec: ScanSpec, evaluator: Optional[AsyncEvaluator] = None) -> ScanResult:
    points = spec.points()
    evaluator = evaluator or AsyncEvaluator()
    tasks = [
        evaluator.evaluate(_scan_row, spec, *point, label=f"row {i}")
        for i, point in enumerate(points)
    ]
    outcomes = await evaluator.run(tasks)

    rows, status, failed = [], [], []
    for i, (point, outcome) in enumerate(zip(points, outcomes)):
        s, a, template, m = point
        if isinstance(outcome, Exception):
            if not isinstance(outcome, ZclError):
                logger.error(f"Scan row {i} crashed: {outcome!r}")
            logger.warning(f"Skipping scan row {i} (s={s}, a={a}, F={template}, m={m}): {outcome}")
            status.append(RowStatus.FAILED)
            failed.append({"index": i, "s": s, "a": a, "F_id": template, "m": m, "error": str(outcome)})
            continue
        status.append(RowStatus.OK)
        rows.append(outcome)

    logger.info(f"Scan completed. {len(rows)}/{len(points)} rows evaluated")
    return ScanResult(
        rows=rows,
        status=status,
        failed_rows=failed,
        metadata={"points": len(points), "seed": int(spec.seed), "n_r": spec.n_r, "n_theta": spec.n_theta},
    )


def scan(spec: ScanSpec) -> ScanResult:
    """Evaluate every (s, a, template, m) tuple independently; failed rows are recorded and skipped."""
    return asyncio.run(scan_async(spec))

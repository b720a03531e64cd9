import asyncio

import numpy as np
import pytest

from conftest import make_family, make_zonal
from zclab.curvature import ExtendedVector, mc_extended, omega_zonal_closed_form
from zclab.exceptions import ValidationError, ZclError
from zclab.fields import norm, zonal
from zclab.models import SCAN_COLUMNS, RowStatus
from zclab.search import (
    PerturbationFamily,
    ScanSpec,
    build_scan_case,
    evaluate_coefficients,
    find_positive_mc,
    find_positive_mc_async,
    scan,
)
from zclab.utils import AsyncEvaluator, smooth_window


@pytest.fixture(scope="module")
def small_case(coarse_grid):
    return make_zonal(coarse_grid), make_family(coarse_grid, m_list=(1, 2))


def small_spec(**kwargs):
    values = dict(s=(1.5,), a=(0.0, 1.0), templates=("bump",), m=(1, 2), n_r=48, n_theta=32)
    values.update(kwargs)
    return ScanSpec(**values)


def test_family_layout(coarse_grid):
    family = make_family(coarse_grid, m_list=(1, 3))
    assert family.n_coefficients == 16
    assert family.radial_count == 4
    band = coarse_grid.d - 0.1 * coarse_grid.d
    assert family.half_width == pytest.approx(band)
    t = coarse_grid.profile.r_nodes / band
    window = smooth_window(t, 16.0)
    np.testing.assert_allclose(family.radial_basis[0], window, atol=1e-15)
    np.testing.assert_allclose(family.radial_basis[3], 0.5 * (5 * t**3 - 3 * t) * window, atol=1e-14)
    assert np.all(family.radial_basis[:, np.abs(t) >= 1.0] == 0.0)
    coefficients = np.zeros(16)
    coefficients[2] = 1.0  # m=1, k=1, cos
    psi = family.psi(coefficients).psi
    np.testing.assert_allclose(psi, family.radial_basis[1][:, None] * np.cos(coarse_grid.theta)[None, :], atol=1e-15)


def test_family_closure_matches_grid_values(coarse_grid):
    family = make_family(coarse_grid, m_list=(1, 2))
    coefficients = np.random.default_rng(0).standard_normal(family.n_coefficients)
    R, T = np.meshgrid(coarse_grid.profile.r_nodes, coarse_grid.theta, indexing="ij")
    np.testing.assert_allclose(family.psi_function(coefficients)(R, T), family.psi(coefficients).psi, atol=1e-13)


def test_family_validation(coarse_grid):
    with pytest.raises(ValidationError):
        PerturbationFamily.default(coarse_grid, [])
    with pytest.raises(ValidationError):
        PerturbationFamily.default(coarse_grid, [16])
    with pytest.raises(ValidationError):
        PerturbationFamily.default(coarse_grid, [1], radial_count=0)
    with pytest.raises(ValidationError):
        make_family(coarse_grid).psi(np.zeros(3))


def test_evaluate_coefficients_normalizes(small_case):
    Z, family = small_case
    X = zonal(Z)
    coefficients = np.random.default_rng(1).standard_normal(family.n_coefficients)
    scaled = evaluate_coefficients(family, X, 1.0, 7.0 * coefficients)
    plain = evaluate_coefficients(family, X, 1.0, coefficients)
    assert scaled.mc_extended == pytest.approx(plain.mc_extended, rel=1e-10)
    assert evaluate_coefficients(family, X, 1.0, np.zeros(family.n_coefficients)) is None


def test_zero_budget(small_case):
    Z, family = small_case
    result = find_positive_mc(Z, 1.0, family, budget=0, seed=42)
    assert result.evaluations == 0
    assert result.best_coefficients is None
    assert result.best_mc_extended is None
    assert not result.converged


def test_budget_is_respected(small_case):
    Z, family = small_case
    result = find_positive_mc(Z, 1.0, family, budget=37, seed=3, restarts=4)
    assert result.evaluations <= 37
    assert [r["index"] for r in result.restarts] == [0, 1, 2, 3]
    assert len(result.best_coefficients) == family.n_coefficients


def test_search_is_deterministic(small_case):
    Z, family = small_case
    first = find_positive_mc(Z, 1.0, family, budget=60, seed=11, restarts=3)
    second = find_positive_mc(Z, 1.0, family, budget=60, seed=11, restarts=3)
    assert first.to_dict() == second.to_dict()


def test_search_value_matches_direct_evaluation(small_case):
    Z, family = small_case
    result = find_positive_mc(Z, 1.0, family, budget=40, seed=5, restarts=2)
    report = evaluate_coefficients(family, zonal(Z), 1.0, np.array(result.best_coefficients))
    assert report.mc_extended == result.best_mc_extended
    assert result.converged == (result.best_mc_extended > 1e-12)


def test_zonal_family_has_no_positive_curvature(coarse_grid):
    Z = make_zonal(coarse_grid)
    family = make_family(coarse_grid, m_list=(0,))
    result = find_positive_mc(Z, 1.0, family, budget=40, seed=2, restarts=2)
    assert not result.converged
    assert abs(result.best_mc_extended) < 1e-12


def test_search_validation(small_case, grid15):
    Z, family = small_case
    with pytest.raises(ValidationError):
        find_positive_mc(Z, 1.0, family, budget=-1, seed=0)
    with pytest.raises(ValidationError):
        find_positive_mc(Z, 1.0, family, budget=10, seed=0, restarts=0)
    with pytest.raises(ValidationError):
        find_positive_mc(make_zonal(grid15), 1.0, family, budget=10, seed=0)


async def test_async_search_with_shared_evaluator(small_case):
    Z, family = small_case
    evaluator = AsyncEvaluator(concurrency=2)
    result = await find_positive_mc_async(Z, 0.5, family, budget=20, seed=9, restarts=2, evaluator=evaluator)
    assert result.evaluations <= 20
    assert result.metadata["a"] == 0.5


async def test_evaluator_collects_failures():
    evaluator = AsyncEvaluator(concurrency=1)

    def fail():
        raise ValidationError("bad input")

    outcomes = await evaluator.run([evaluator.evaluate(lambda: 3), evaluator.evaluate(fail, label="fail")])
    assert outcomes[0] == 3
    assert isinstance(outcomes[1], ValidationError)


def test_scan_rows():
    result = scan(small_spec())
    assert len(result.rows) == 4
    assert result.status == [RowStatus.OK] * 4
    assert result.failed_rows == []
    frame = result.to_dataframe()
    assert list(frame.columns) == SCAN_COLUMNS
    assert list(frame["a"]) == [0.0, 0.0, 1.0, 1.0]
    assert list(frame["m"]) == [1, 2, 1, 2]
    assert set(frame["F_id"]) == {"bump"}


def test_scan_row_matches_direct_evaluation():
    spec = small_spec(a=(1.0,), m=(2,))
    row = scan(spec).rows[0]
    Z, Y = build_scan_case(spec, 1.5, "bump", 2)
    assert norm(Y) == pytest.approx(1.0, rel=1e-13)
    report = mc_extended(ExtendedVector(zonal(Z), 1.0), ExtendedVector(Y))
    assert row.mc_extended == report.mc_extended
    assert row.mc_base == report.mc_base
    assert row.converged == (report.mc_extended > 1e-12)


def test_scan_coriolis_difference_is_closed_form():
    spec = small_spec(m=(1,), n_r=129, n_theta=128)
    rows = scan(spec).rows
    Z, Y = build_scan_case(spec, 1.5, "bump", 1)
    closed = omega_zonal_closed_form(Z, Y)
    assert rows[1].mc_extended - rows[0].mc_extended == pytest.approx(-closed, rel=1e-6)


def test_scan_records_failed_rows():
    result = scan(small_spec(templates=("bump", "csv"), a=(1.0,)))
    assert len(result.rows) == 2
    assert len(result.failed_rows) == 2
    assert {row["F_id"] for row in result.failed_rows} == {"csv"}
    assert result.status.count(RowStatus.FAILED) == 2
    assert "path" in result.failed_rows[0]["error"]


def test_empty_scan():
    result = scan(small_spec(s=()))
    assert result.rows == []
    assert list(result.to_dataframe().columns) == SCAN_COLUMNS


def test_scan_uses_independent_rows():
    a = scan(small_spec(m=(1, 2))).rows
    b = scan(small_spec(m=(2,))).rows
    assert [r.mc_extended for r in a if r.m == 2] == [r.mc_extended for r in b]


def test_fractional_budget_is_rejected(small_case):
    Z, family = small_case
    with pytest.raises(ZclError):
        asyncio.run(find_positive_mc_async(Z, 1.0, family, budget=1.5, seed=0))

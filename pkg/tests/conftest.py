import numpy as np
import pytest

from zclab.fields import StreamFunction, ZonalSpec, from_stream, norm
from zclab.oracle import oracle_profile
from zclab.search import PerturbationFamily
from zclab.surface import build_grid, support_margin
from zclab.templates import create_template
from zclab.utils import band_window, smooth_window

REFERENCE_S = (1.0, 1.5, 2.0)
REFERENCE_RESOLUTION = (129, 128)

# (template, amplitude, sharpness)
ZONAL_CASES = (
    ("bump", -0.005, 12.0),
    ("cos_window", -0.005, 8.0),
    ("bump", -0.01, 6.0),
)


@pytest.fixture(scope="session")
def grids():
    """Reference grids keyed by s."""
    return {s: build_grid(s, *REFERENCE_RESOLUTION) for s in REFERENCE_S}


@pytest.fixture(scope="session")
def grid15(grids):
    return grids[1.5]


@pytest.fixture(scope="session")
def coarse_grid():
    return build_grid(1.5, 48, 32)


@pytest.fixture(scope="session")
def oracle_profiles():
    return {s: oracle_profile(s) for s in REFERENCE_S}


def make_zonal(grid, template="bump", amplitude=-0.005, sharpness=12.0, fraction=0.1) -> ZonalSpec:
    delta = support_margin(grid.profile, fraction)
    return create_template(template, amplitude, sharpness=sharpness).build(grid, delta)


def zonal_cases(grid):
    return [make_zonal(grid, *case) for case in ZONAL_CASES]


def make_family(grid, m_list=(1, 2, 3), radial_count=4, fraction=0.1) -> PerturbationFamily:
    return PerturbationFamily.default(
        grid, m_list, radial_count, delta=support_margin(grid.profile, fraction)
    )


def seeded_coefficients(family: PerturbationFamily, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(family.n_coefficients)


def random_perturbation(grid, seed, m_list=(1, 2, 3)):
    """Normalized band-limited divergence-free field from a seeded family draw."""
    family = make_family(grid, m_list)
    Y = family.field(seeded_coefficients(family, seed))
    return Y / norm(Y)


def narrow_zonal(grid, amplitude=-0.005) -> ZonalSpec:
    """Zonal flow supported in |r| < 0.4 d."""
    half_width = 0.4 * grid.d
    r = grid.profile.r_nodes
    F = amplitude * smooth_window(r / half_width, 12.0)
    return ZonalSpec(grid=grid, F=F, delta=grid.d - half_width, label="narrow")


def polar_perturbation(grid):
    """Divergence-free field supported in 0.55 d < r < 0.85 d, away from narrow_zonal."""

    def psi(r, theta):
        return band_window(r, 0.7 * grid.d, 0.15 * grid.d, 16.0) * np.cos(2 * theta)

    return from_stream(StreamFunction.from_function(grid, psi))

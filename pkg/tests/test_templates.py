import numpy as np
import pandas as pd
import pytest

from zclab.exceptions import ExportError, ValidationError
from zclab.surface import support_margin
from zclab.templates import create_template, get_available_templates
from zclab.utils import smooth_window


def write_profile(path, r, F):
    pd.DataFrame({"r": r, "F": F}).to_csv(path, index=False)
    return path


@pytest.mark.parametrize("name", ["bump", "cos_window"])
def test_named_templates_peak_at_amplitude(name, grid15):
    delta = support_margin(grid15.profile, 0.1)
    spec = create_template(name, -0.005).build(grid15, delta)
    assert np.min(spec.F) == pytest.approx(-0.005, rel=1e-3)
    assert np.max(spec.F) <= 0.0
    assert np.all(spec.F[np.abs(grid15.profile.r_nodes) >= grid15.d - delta] == 0.0)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_csv_profile_sign_is_set_by_amplitude(sign, grid15, tmp_path):
    delta = support_margin(grid15.profile, 0.1)
    half_width = grid15.d - delta
    r = np.linspace(-grid15.d, grid15.d, 801)
    path = write_profile(tmp_path / "flow.csv", r, sign * 0.3 * smooth_window(r / half_width, 12.0))

    spec = create_template("csv", -0.005, path=path).build(grid15, delta)
    reference = create_template("bump", -0.005).build(grid15, delta)
    assert np.max(spec.F) <= 1e-9
    np.testing.assert_allclose(spec.F, reference.F, atol=1e-4 * 0.005)


def test_csv_profile_requires_amplitude():
    with pytest.raises(TypeError):
        get_available_templates()["csv"]["class"](path="flow.csv")


def test_csv_profile_rejects_zero_samples(grid15, tmp_path):
    r = np.linspace(-grid15.d, grid15.d, 11)
    path = write_profile(tmp_path / "flat.csv", r, np.zeros_like(r))
    template = create_template("csv", -0.005, path=path)
    with pytest.raises(ExportError, match="identically zero"):
        template.build(grid15, support_margin(grid15.profile, 0.1))


def test_csv_profile_needs_path():
    with pytest.raises(ValidationError):
        create_template("csv", -0.005)

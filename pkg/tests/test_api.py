import json

import pytest

import zclab
from zclab import RunConfig
from zclab.exceptions import ConfigError, ValidationError, ZclError
from zclab.models import SCAN_COLUMNS

SMALL = {"grid.n_r": 48, "grid.n_theta": 32, "perturbation.m": [1, 2]}


def test_package_exports():
    assert zclab.__version__ == "0.1.0"
    for name in ("compute_mc", "verify", "search", "scan", "scan_to_dataframe", "export_profile", "load_config"):
        assert callable(getattr(zclab, name))
    assert issubclass(zclab.ConfigError, zclab.ValidationError)


def test_compute_mc():
    report = zclab.compute_mc(overrides=SMALL)
    assert report.a == 1.0
    assert report.gap > 0.0
    assert report.mc_extended == pytest.approx(report.mc_base + report.gap, rel=1e-14, abs=1e-18)
    assert report.params["grid.n_r"] == 48


def test_compute_mc_ignores_environment(monkeypatch):
    monkeypatch.setenv("ZCL_SURFACE__S", "2.0")
    report = zclab.compute_mc(overrides=SMALL)
    assert report.grid["s"] == 1.5


def test_config_sources(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[surface]\ns = 2.0\n")
    assert zclab.config_dict(path)["surface.s"] == 2.0
    base = RunConfig(s=1.0, n_r=48, n_theta=32)
    resolved = zclab.config_dict(base, overrides={"coriolis.a": 0.5, "seed": None})
    assert resolved["surface.s"] == 1.0
    assert resolved["coriolis.a"] == 0.5
    assert resolved["seed"] == 42


def test_invalid_configuration():
    with pytest.raises(ConfigError):
        zclab.compute_mc(overrides={"surface.s": 0.5})
    with pytest.raises(ValidationError):
        zclab.verify(overrides={"flow.amplitude": 1.0})


def test_verify_sets_passed_flag():
    report = zclab.verify(overrides={"perturbation.m": [1, 2], "perturbation.coefficients": [0.0] * 16})
    assert report.flags["passed"] is True
    assert report.grid["n_theta"] == 128
    assert report.residuals["jacobi"] == 0.0


def test_verify_default_case_passes():
    report = zclab.verify()
    assert report.flags["passed"] is True
    assert report.residuals["jacobi"] < 1e-6


def test_search_and_scan():
    result = zclab.search(overrides={**SMALL, "search.budget": 10, "search.restarts": 2})
    assert result.evaluations <= 10
    assert result.metadata["params"]["search.budget"] == 10

    frame = zclab.scan_to_dataframe(overrides={**SMALL, "scan.m": [1, 2], "scan.a": [1.0]})
    assert list(frame.columns) == SCAN_COLUMNS
    assert list(frame["m"]) == [1, 2]
    assert (frame["gap"] > 0.0).all()


def test_export_profile(tmp_path):
    path = zclab.export_profile(tmp_path / "p.csv", overrides={"surface.s": 2.0, "grid.n_r": 33})
    assert path.exists()
    meta = json.loads((tmp_path / "p.meta.json").read_text())
    assert meta["s"] == 2.0 and meta["n_r"] == 33
    with pytest.raises(ZclError):
        zclab.export_profile("")

import pytest

from zclab.config import (
    DEFAULTS,
    KEYS,
    RunConfig,
    env_overrides,
    load_config,
    parse_env_value,
    parse_resolution,
    read_config_file,
)
from zclab.exceptions import ConfigError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        "seed = 7\n"
        "\n"
        "[surface]\n"
        "s = 2.0\n"
        "\n"
        "[grid]\n"
        "n_r = 65\n"
        "n_theta = 64\n"
        "\n"
        "[perturbation]\n"
        "m = [1, 2]\n"
    )
    return path


def test_defaults():
    config = load_config(environ={})
    assert config == RunConfig()
    assert set(DEFAULTS) == set(KEYS)
    assert DEFAULTS["surface.s"] == 1.5
    assert DEFAULTS["grid.n_r"] == 129 and DEFAULTS["grid.n_theta"] == 128
    assert DEFAULTS["search.budget"] == 2000
    assert DEFAULTS["seed"] == 42
    assert RunConfig.from_mapping(DEFAULTS) == RunConfig()


def test_file_values_are_flattened(config_file):
    values = read_config_file(config_file)
    assert values == {"seed": 7, "surface.s": 2.0, "grid.n_r": 65, "grid.n_theta": 64, "perturbation.m": [1, 2]}
    config = load_config(config_file, environ={})
    assert (config.s, config.n_r, config.n_theta, config.seed) == (2.0, 65, 64, 7)
    assert config.m_list == [1, 2]
    assert config.template == "bump"


def test_precedence(config_file):
    environ = {"ZCL_SURFACE__S": "1.75", "ZCL_SEED": "11", "HOME": "/root"}
    config = load_config(config_file, environ=environ)
    assert config.s == 1.75
    assert config.seed == 11
    assert config.n_r == 65

    config = load_config(config_file, environ=environ, overrides={"seed": 3, "surface.s": None})
    assert config.seed == 3
    assert config.s == 1.75


def test_env_values():
    assert parse_env_value("1.5") == 1.5
    assert parse_env_value("12") == 12
    assert parse_env_value("true") is True
    assert parse_env_value("[1, 2, 3]") == [1, 2, 3]
    assert parse_env_value('"bump"') == "bump"
    assert parse_env_value("cos_window") == "cos_window"
    assert env_overrides({"ZCL_FLOW__TEMPLATE": "cos_window", "PATH": "/bin"}) == {"flow.template": "cos_window"}


def test_unknown_keys_are_rejected(tmp_path):
    with pytest.raises(ConfigError):
        env_overrides({"ZCL_SURFACE__Q": "1"})
    path = tmp_path / "bad.toml"
    path.write_text("[surface]\nq = 1.0\n")
    with pytest.raises(ConfigError):
        load_config(path, environ={})
    with pytest.raises(ConfigError):
        load_config(environ={}, overrides={"coriolis.c": 1.0})


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml", environ={})
    path = tmp_path / "broken.toml"
    path.write_text("[surface\ns = \n")
    with pytest.raises(ConfigError):
        load_config(path, environ={})


def test_value_coercion():
    config = load_config(environ={}, overrides={"perturbation.m": 3, "coriolis.a": 2})
    assert config.m_list == [3]
    assert config.a == 2.0 and isinstance(config.a, float)
    with pytest.raises(ConfigError):
        load_config(environ={}, overrides={"grid.n_r": 64.5})
    with pytest.raises(ConfigError):
        load_config(environ={}, overrides={"flow.west_facing": "yes"})
    with pytest.raises(ConfigError):
        load_config(environ={}, overrides={"flow.template": 3})


@pytest.mark.parametrize(
    "overrides",
    [
        {"surface.s": 0.9},
        {"grid.n_theta": 65},
        {"support.delta": 1.0},
        {"flow.template": "csv"},
        {"flow.template": "square"},
        {"flow.amplitude": 0.01},
        {"coriolis.a": -1.0},
        {"perturbation.source": "field_csv"},
        {"perturbation.source": "random"},
        {"perturbation.m": [64]},
        {"perturbation.coefficients": [1.0, 2.0]},
        {"search.budget": -5},
        {"scan.templates": ["bump", "square"]},
        {"tolerances.identity": 0.0},
        {"seed": -1},
    ],
)
def test_validation(overrides):
    with pytest.raises(ConfigError):
        load_config(environ={}, overrides=overrides)


def test_east_facing_flow_may_be_positive():
    config = load_config(environ={}, overrides={"flow.west_facing": False, "flow.amplitude": 0.01})
    assert config.amplitude == 0.01


def test_resolution():
    assert parse_resolution("257x256") == (257, 256)
    assert parse_resolution("65X64") == (65, 64)
    for text in ("129", "129x", "axb", "129x128x2"):
        with pytest.raises(ConfigError):
            parse_resolution(text)

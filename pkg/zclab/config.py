"""
Run configuration for the zclab commands.

Config files are TOML with flat dotted keys, e.g.::

    surface.s = 1.5
    grid.n_r = 129
    flow.template = "bump"
    coriolis.a = 1.0

Values are resolved as defaults < file < environment (ZCL_SECTION__KEY) <
command-line overrides, then validated once before any computation.
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import toml

from .exceptions import ConfigError, ExportError
from .templates import get_available_templates

logger = logging.getLogger(__name__)

ENV_PREFIX = "ZCL_"
PERTURBATION_SOURCES = ("family", "psi_csv", "field_csv")

# dotted key -> RunConfig attribute
KEYS = {
    "surface.s": "s",
    "grid.n_r": "n_r",
    "grid.n_theta": "n_theta",
    "support.delta": "delta",
    "flow.template": "template",
    "flow.amplitude": "amplitude",
    "flow.sharpness": "sharpness",
    "flow.west_facing": "west_facing",
    "flow.path": "flow_path",
    "coriolis.a": "a",
    "coriolis.b": "b",
    "perturbation.source": "perturbation_source",
    "perturbation.path": "perturbation_path",
    "perturbation.m": "m_list",
    "perturbation.radial_count": "radial_count",
    "perturbation.coefficients": "coefficients",
    "search.budget": "budget",
    "search.restarts": "restarts",
    "scan.s": "scan_s",
    "scan.a": "scan_a",
    "scan.templates": "scan_templates",
    "scan.m": "scan_m",
    "tolerances.identity": "identity_tol",
    "tolerances.divergence": "divergence_tol",
    "tolerances.positivity": "positivity_tol",
    "seed": "seed",
    "output.path": "output_path",
}


@dataclass
class RunConfig:
    s: float = 1.5
    n_r: int = 129
    n_theta: int = 128
    delta: float = 0.1
    template: str = "bump"
    amplitude: float = -0.005
    sharpness: float = 12.0
    west_facing: bool = True
    flow_path: str = ""
    a: float = 1.0
    b: float = 0.0
    perturbation_source: str = "family"
    perturbation_path: str = ""
    m_list: List[int] = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    radial_count: int = 4
    coefficients: List[float] = field(default_factory=list)
    budget: int = 2000
    restarts: int = 8
    scan_s: List[float] = field(default_factory=lambda: [1.5])
    scan_a: List[float] = field(default_factory=lambda: [0.0, 1.0])
    scan_templates: List[str] = field(default_factory=lambda: ["bump"])
    scan_m: List[int] = field(default_factory=lambda: [1, 2, 3])
    identity_tol: float = 1e-6
    divergence_tol: float = 1e-8
    positivity_tol: float = 1e-12
    seed: int = 42
    output_path: str = ""

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        defaults = cls()
        kwargs = {}
        for key, value in values.items():
            if key not in KEYS:
                raise ConfigError(f"Unknown configuration key '{key}'")
            attribute = KEYS[key]
            kwargs[attribute] = _coerce(key, value, getattr(defaults, attribute))
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        return {key: values[attribute] for key, attribute in KEYS.items()}

    def validate(self) -> "RunConfig":
        """Check every value against the preconditions of the operations it feeds."""
        templates = get_available_templates()
        _require(math.isfinite(self.s) and self.s >= 1.0, "surface.s must be a finite number >= 1")
        _require(self.n_r >= 16, "grid.n_r must be >= 16")
        _require(self.n_theta >= 8 and self.n_theta % 2 == 0, "grid.n_theta must be even and >= 8")
        _require(0.0 < self.delta < 1.0, "support.delta is a fraction of d and must lie in (0, 1)")
        _require(self.template in templates, f"flow.template must be one of {list(templates)}")
        _require(
            self.template != "csv" or bool(self.flow_path),
            "flow.path is required when flow.template = 'csv'",
        )
        _require(math.isfinite(self.amplitude), "flow.amplitude must be finite")
        _require(
            not (self.west_facing and self.amplitude > 0.0),
            "flow.amplitude must be <= 0 for a west-facing flow",
        )
        _require(self.sharpness > 0.0, "flow.sharpness must be positive")
        _require(math.isfinite(self.a) and self.a >= 0.0, "coriolis.a must be a finite number >= 0")
        _require(math.isfinite(self.b), "coriolis.b must be finite")
        _require(
            self.perturbation_source in PERTURBATION_SOURCES,
            f"perturbation.source must be one of {list(PERTURBATION_SOURCES)}",
        )
        _require(
            self.perturbation_source == "family" or bool(self.perturbation_path),
            f"perturbation.path is required when perturbation.source = '{self.perturbation_source}'",
        )
        _require(bool(self.m_list), "perturbation.m must not be empty")
        _require(
            all(0 <= m < self.n_theta // 2 for m in self.m_list),
            f"perturbation.m entries must lie in [0, {self.n_theta // 2})",
        )
        _require(self.radial_count >= 1, "perturbation.radial_count must be >= 1")
        expected = 2 * self.radial_count * len(self.m_list)
        _require(
            not self.coefficients or len(self.coefficients) == expected,
            f"perturbation.coefficients must have {expected} entries",
        )
        _require(self.budget >= 0, "search.budget must be >= 0")
        _require(self.restarts >= 1, "search.restarts must be >= 1")
        _require(all(math.isfinite(s) and s >= 1.0 for s in self.scan_s), "scan.s entries must be >= 1")
        _require(all(math.isfinite(a) and a >= 0.0 for a in self.scan_a), "scan.a entries must be >= 0")
        _require(
            all(name in templates for name in self.scan_templates),
            f"scan.templates entries must be in {list(templates)}",
        )
        _require(
            all(0 <= m < self.n_theta // 2 for m in self.scan_m),
            f"scan.m entries must lie in [0, {self.n_theta // 2})",
        )
        for key in ("identity_tol", "divergence_tol", "positivity_tol"):
            _require(getattr(self, key) > 0.0, f"tolerances must be positive ({key})")
        _require(self.seed >= 0, "seed must be a nonnegative integer")
        return self


DEFAULTS = RunConfig().to_dict()


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _coerce(key: str, value: Any, default: Any) -> Any:
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError(f"expected true/false, got {value!r}")
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or int(value) != value:
                raise TypeError(f"expected an integer, got {value!r}")
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise TypeError(f"expected a number, got {value!r}")
            return float(value)
        if isinstance(default, str):
            if not isinstance(value, str):
                raise TypeError(f"expected a string, got {value!r}")
            return value
        if isinstance(default, list):
            if not isinstance(value, list):
                value = [value]
            element = _LIST_TYPES[key]
            return [_coerce(key + "[]", item, element()) for item in value]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for '{key}': {e}") from e
    return value


_LIST_TYPES = {
    "perturbation.m": int,
    "perturbation.coefficients": float,
    "scan.s": float,
    "scan.a": float,
    "scan.templates": str,
    "scan.m": int,
}


def _flatten(table: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    if not Path(path).is_file():
        raise ConfigError(f"Config file {path} does not exist")
    try:
        table = toml.load(str(path))
    except toml.TomlDecodeError as e:
        raise ConfigError(f"Malformed config file {path}: {e}") from e
    except OSError as e:
        raise ExportError(f"Cannot read config file {path}: {e}") from e
    return _flatten(table)


def parse_env_value(raw: str) -> Any:
    """Interpret an environment value as a TOML value, falling back to the raw string."""
    try:
        return toml.loads(f"value = {raw}")["value"]
    except (toml.TomlDecodeError, ValueError, IndexError):
        return raw


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    environ = os.environ if environ is None else environ
    values = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower().replace("__", ".")
        if key not in KEYS:
            raise ConfigError(f"Environment variable {name} does not name a configuration key")
        values[key] = parse_env_value(raw)
    return values


def parse_resolution(text: str) -> Tuple[int, int]:
    """'129x128' -> (129, 128)."""
    parts = str(text).lower().split("x")
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise ConfigError(f"Resolution must look like RxT (e.g. 129x128), got '{text}'")
    return int(parts[0]), int(parts[1])


def load_config(
    path: Optional[Union[str, Path]] = None,
    environ: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Resolve a RunConfig from defaults, a config file, the environment and overrides.

    Args:
        path: Optional TOML file with dotted keys
        environ: Environment mapping (defaults to os.environ)
        overrides: Dotted-key values with the highest precedence

    Raises:
        ConfigError: For unknown keys, malformed values or failed validation
        ExportError: If the config file cannot be read
    """
    values = dict(DEFAULTS)
    if path:
        values.update(read_config_file(path))
        logger.info(f"Loaded configuration from {path}")
    values.update(env_overrides(environ))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig.from_mapping(values).validate()

"""
Synchronous Python API for zclab.

Each function resolves a RunConfig (from a TOML path, an existing RunConfig,
or the defaults), applies dotted-key overrides, and runs the same pipeline
as the matching command-line subcommand. Environment variables are not read
here, so scripted runs depend only on their arguments.

Example:
    >>> import zclab
    >>> report = zclab.compute_mc(overrides={"surface.s": 2.0, "coriolis.a": 0.5})
    >>> report.mc_extended >= report.mc_base
"""

import asyncio
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Union

import pandas as pd

from .config import RunConfig, load_config
from .exceptions import ZclError
from .export import emit_target, write_profile_csv
from .main import evaluate_identities, evaluate_mc, run_search, scan_spec
from .models import IdentityReport, MCReport, ScanResult, SearchResult
from .search import scan as run_scan
from .surface import build_profile

ConfigSource = Union[None, str, Path, RunConfig]


def _resolve(config: ConfigSource, overrides: Optional[Mapping[str, Any]]) -> RunConfig:
    if isinstance(config, RunConfig):
        values = config.to_dict()
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return RunConfig.from_mapping(values).validate()
    return load_config(config, environ={}, overrides=overrides)


def _call(action: str, func: Callable, *args):
    try:
        return func(*args)
    except ZclError:
        # re-raise our custom exceptions without wrapping
        raise
    except Exception as e:
        raise ZclError(f"Error during {action}: {e}") from e


def compute_mc(config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None) -> MCReport:
    """
    Evaluate MC and the extended MC for the configured zonal flow and perturbation.

    Args:
        config: TOML path, RunConfig, or None for the defaults
        overrides (dict): Dotted-key values, e.g. {"coriolis.a": 0.0}

    Returns:
        MCReport: Curvature values, gap, cocycle values and residuals

    Raises:
        ValidationError: For invalid configuration
        ZclError: For other zclab errors
    """
    return _call("MC evaluation", lambda: evaluate_mc(_resolve(config, overrides)))


def verify(config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None) -> IdentityReport:
    """
    Run every identity check; the report's ``flags["passed"]`` tells whether all
    residuals are within the configured tolerances.
    """

    def run():
        report, failures = evaluate_identities(_resolve(config, overrides))
        report.flags["passed"] = not failures
        return report

    return _call("identity verification", run)


def search(config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None) -> SearchResult:
    return _call("search", lambda: asyncio.run(run_search(_resolve(config, overrides))))


def scan(config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None) -> ScanResult:
    """Evaluate the configured (s, a, template, m) grid; failed rows land in ``failed_rows``."""
    return _call("scan", lambda: run_scan(scan_spec(_resolve(config, overrides))))


def scan_to_dataframe(
    config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None
) -> pd.DataFrame:
    """
    Run a scan and return its rows as a DataFrame.

    Returns:
        pd.DataFrame: Columns s, a, m, F_id, mc_base, mc_extended, gap,
            omega_xy, converged, seed (empty with those columns if no row
            succeeded)
    """
    return scan(config, overrides).to_dataframe()


def export_profile(
    path: Union[str, Path], config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None
) -> Path:
    """Write the profile CSV of M_s and its metadata sidecar; returns the CSV path."""
    target = emit_target(path)
    if target is None:
        raise ZclError("export_profile needs an output path")

    def run():
        resolved = _resolve(config, overrides)
        logging.debug(f"Exporting profile for s={resolved.s} with {resolved.n_r} nodes")
        return write_profile_csv(build_profile(resolved.s, resolved.n_r), target)

    return _call("profile export", run)


def config_dict(config: ConfigSource = None, overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Resolved configuration as dotted keys."""
    return _call("configuration", lambda: _resolve(config, overrides).to_dict())

import asyncio
import logging
import sys
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .config import RunConfig, load_config, parse_resolution
from .curvature import ExtendedVector, gap_is_degenerate, mc_extended, verify_all_identities
from .exceptions import (
    ExportError,
    NumericalError,
    ProfileError,
    ValidationError,
    ZclError,
)
from .export import (
    emit_target,
    json_text,
    profile_text,
    read_field_csv,
    read_stream_csv,
    scan_csv_text,
    write_profile_csv,
    write_text,
)
from .fields import VectorField, ZonalSpec, from_stream, norm, zonal
from .models import IdentityReport, MCReport, ScanResult, SearchResult
from .search import PerturbationFamily, ScanSpec, find_positive_mc_async, scan_async
from .surface import Grid, build_grid, build_profile, support_margin
from .templates import create_template

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    handlers=[logging.StreamHandler()],
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IDENTITY = 2
EXIT_IO = 3


def emit(text: str, path) -> None:
    """Write command output to ``path``, or to stdout when no path is set."""
    target = emit_target(path)
    if target is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        write_text(text, target)


def build_zonal(config: RunConfig, grid: Grid) -> ZonalSpec:
    delta = support_margin(grid.profile, config.delta)
    template = create_template(
        config.template, config.amplitude, sharpness=config.sharpness, path=config.flow_path
    )
    Z = template.build(grid, delta, west_facing=config.west_facing)
    # validates sign and support
    zonal(Z)
    return Z


def build_family(config: RunConfig, grid: Grid, delta: float) -> PerturbationFamily:
    return PerturbationFamily.default(grid, config.m_list, config.radial_count, delta=delta)


def build_perturbation(config: RunConfig, grid: Grid, delta: float) -> VectorField:
    """
    Perturbation Y from the configured source.

    Family members are normalized to ||Y|| = 1 (the zero member stays zero);
    fields read from CSV are used as given.
    """
    source = config.perturbation_source
    if source == "psi_csv":
        return from_stream(read_stream_csv(config.perturbation_path, grid))
    if source == "field_csv":
        return read_field_csv(config.perturbation_path, grid)

    family = build_family(config, grid, delta)
    if config.coefficients:
        coefficients = np.asarray(config.coefficients, dtype=float)
    else:
        coefficients = np.random.default_rng(config.seed).standard_normal(family.n_coefficients)
    Y = family.field(coefficients)
    size = norm(Y)
    return Y / size if size > 0.0 else Y


def setup_case(config: RunConfig) -> Tuple[Grid, ZonalSpec, VectorField]:
    grid = build_grid(config.s, config.n_r, config.n_theta)
    Z = build_zonal(config, grid)
    Y = build_perturbation(config, grid, Z.delta)
    logger.info(f"Case ready: s={grid.s}, d={grid.d:.6f}, grid {grid.n_r}x{grid.n_theta}, F={Z.label}")
    return grid, Z, Y


def evaluate_mc(config: RunConfig) -> MCReport:
    if config.b != 0.0:
        logger.warning(f"coriolis.b = {config.b} is ignored; the scalar part of Y does not enter MC")
    _, Z, Y = setup_case(config)
    report = mc_extended(
        ExtendedVector(zonal(Z), config.a), ExtendedVector(Y, config.b), params=config.to_dict(), delta=Z.delta
    )
    report.flags["degenerate_gap"] = gap_is_degenerate(Z, Y)
    return report


def evaluate_identities(config: RunConfig) -> Tuple[IdentityReport, Dict[str, float]]:
    _, Z, Y = setup_case(config)
    report = verify_all_identities(Z, config.a, Y)
    failures = report.failures({"divergence": config.divergence_tol}, config.identity_tol)
    return report, failures


def scan_spec(config: RunConfig) -> ScanSpec:
    return ScanSpec(
        s=tuple(config.scan_s),
        a=tuple(config.scan_a),
        templates=tuple(config.scan_templates),
        m=tuple(config.scan_m),
        n_r=config.n_r,
        n_theta=config.n_theta,
        delta_fraction=config.delta,
        amplitude=config.amplitude,
        sharpness=config.sharpness,
        template_path=config.flow_path,
        west_facing=config.west_facing,
        radial_count=config.radial_count,
        seed=config.seed,
        positivity=config.positivity_tol,
    )


async def run_search(config: RunConfig) -> SearchResult:
    if config.perturbation_source != "family":
        logger.warning("search always explores the perturbation family; perturbation.path is unused")
    grid = build_grid(config.s, config.n_r, config.n_theta)
    Z = build_zonal(config, grid)
    family = build_family(config, grid, Z.delta)
    result = await find_positive_mc_async(
        Z,
        config.a,
        family,
        config.budget,
        config.seed,
        restarts=config.restarts,
        positivity=config.positivity_tol,
    )
    result.metadata["params"] = config.to_dict()
    return result


async def cmd_surface(config: RunConfig) -> int:
    profile = await asyncio.to_thread(build_profile, config.s, config.n_r)
    target = emit_target(config.output_path)
    if target is None:
        emit(profile_text(profile), None)
    else:
        write_profile_csv(profile, target)
    logger.info(f"Profile for s={profile.s}: d={profile.d:.17g}, {profile.n_r} nodes")
    return EXIT_OK


async def cmd_mc(config: RunConfig) -> int:
    report = await asyncio.to_thread(evaluate_mc, config)
    emit(json_text(report.to_dict()), config.output_path)
    logger.info(f"mc_base={report.mc_base:.6e}, mc_extended={report.mc_extended:.6e}")
    return EXIT_OK


async def cmd_verify(config: RunConfig) -> int:
    report, failures = await asyncio.to_thread(evaluate_identities, config)
    payload = report.to_dict()
    payload["failures"] = failures
    payload["passed"] = not failures
    payload["params"] = config.to_dict()
    emit(json_text(payload), config.output_path)
    if failures:
        logger.error(f"Identity residuals above threshold: {sorted(failures)}")
        return EXIT_IDENTITY
    logger.info("All identity residuals below threshold")
    return EXIT_OK


async def cmd_search(config: RunConfig) -> int:
    result = await run_search(config)
    emit(json_text(result.to_dict()), config.output_path)
    if not result.converged:
        logger.warning(
            f"No positive mc_extended found within {config.budget} evaluations (inconclusive)"
        )
    return EXIT_OK


async def cmd_scan(config: RunConfig) -> int:
    result: ScanResult = await scan_async(scan_spec(config))
    emit(scan_csv_text(result), config.output_path)
    if result.failed_rows:
        logger.warning(f"{len(result.failed_rows)} scan rows failed and were skipped")
    return EXIT_OK


COMMANDS = {
    "surface": cmd_surface,
    "verify": cmd_verify,
    "mc": cmd_mc,
    "search": cmd_search,
    "scan": cmd_scan,
}


def command_overrides(args) -> Dict[str, Any]:
    """Dotted-key overrides from command-line flags; unset flags are skipped."""
    overrides: Dict[str, Optional[Any]] = {
        "seed": getattr(args, "seed", None),
        "output.path": getattr(args, "out", None),
        "search.budget": getattr(args, "budget", None),
    }
    resolution = getattr(args, "resolution", None)
    if resolution:
        overrides["grid.n_r"], overrides["grid.n_theta"] = parse_resolution(resolution)
    return {k: v for k, v in overrides.items() if v is not None}


async def main(args) -> int:
    """Run one subcommand and map failures to exit codes."""
    command = COMMANDS.get(getattr(args, "command", None))
    if command is None:
        logger.error(f"Unknown command {getattr(args, 'command', None)!r}. Available: {list(COMMANDS)}")
        return EXIT_VALIDATION

    try:
        config = load_config(getattr(args, "config", None), overrides=command_overrides(args))
        return await command(config)
    except (ValidationError, ProfileError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_VALIDATION
    except NumericalError as e:
        logger.error(f"Numerical check failed: {e}")
        return EXIT_IDENTITY
    except (ExportError, OSError) as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_IO
    except ZclError as e:
        logger.error(f"Error: {e}")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        logger.info("Process interrupted by user")
        return 130


if __name__ == "__main__":
    from .cli import cli

    sys.exit(cli())

"""
CSV and JSON import/export for profiles, fields, reports and scan tables.

Floats are written with 17 significant digits and JSON carries no timestamps,
so identical inputs give byte-identical files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from .exceptions import ExportError, GridMismatchError
from .fields import StreamFunction, VectorField
from .models import ScanResult
from .surface import Grid, SurfaceProfile
from .utils import to_jsonable

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
PROFILE_COLUMNS = ["r", "c1", "c2", "c1_dot", "c2_dot"]
FIELD_COLUMNS = ["r", "theta", "comp_r", "comp_theta"]
STREAM_COLUMNS = ["r", "theta", "psi"]
COORDINATE_TOLERANCE = 1e-12

PathLike = Union[str, Path]


def csv_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def json_text(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2) + "\n"


def write_text(text: str, path: PathLike) -> Path:
    path = Path(path)
    try:
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ExportError(f"Failed to write {path}: {e}") from e
    logger.info(f"Wrote {path}")
    return path


def profile_frame(profile: SurfaceProfile) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "r": profile.r_nodes,
            "c1": profile.c1,
            "c2": profile.c2,
            "c1_dot": profile.c1_dot,
            "c2_dot": profile.c2_dot,
        },
        columns=PROFILE_COLUMNS,
    )


def profile_metadata(profile: SurfaceProfile) -> dict:
    return {"s": profile.s, "d": profile.d, "n_r": profile.n_r}


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def profile_text(profile: SurfaceProfile) -> str:
    """Profile table preceded by a ``#`` comment line carrying s, d and n_r."""
    header = f"# s={profile.s:.17g} d={profile.d:.17g} n_r={profile.n_r}\n"
    return header + csv_text(profile_frame(profile))


def write_profile_csv(profile: SurfaceProfile, path: PathLike) -> Path:
    """Write the profile table and its ``<stem>.meta.json`` sidecar (s, d, n_r)."""
    path = write_text(csv_text(profile_frame(profile)), path)
    write_text(json_text(profile_metadata(profile)), sidecar_path(path))
    return path


def _node_columns(grid: Grid):
    R, T = np.meshgrid(grid.profile.r_nodes, grid.theta, indexing="ij")
    return R.ravel(), T.ravel()


def field_frame(u: VectorField) -> pd.DataFrame:
    r, theta = _node_columns(u.grid)
    return pd.DataFrame(
        {"r": r, "theta": theta, "comp_r": u.comp_r.ravel(), "comp_theta": u.comp_theta.ravel()},
        columns=FIELD_COLUMNS,
    )


def stream_frame(psi: StreamFunction) -> pd.DataFrame:
    r, theta = _node_columns(psi.grid)
    return pd.DataFrame({"r": r, "theta": theta, "psi": psi.psi.ravel()}, columns=STREAM_COLUMNS)


def write_field_csv(u: VectorField, path: PathLike) -> Path:
    return write_text(csv_text(field_frame(u)), path)


def write_stream_csv(psi: StreamFunction, path: PathLike) -> Path:
    return write_text(csv_text(stream_frame(psi)), path)


def _read_grid_csv(path: PathLike, grid: Grid, columns) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ExportError(f"Cannot read {path}: {e}") from e

    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ExportError(f"{path} is missing columns {missing}")
    frame = frame[columns]
    if not all(pd.api.types.is_numeric_dtype(frame[c]) for c in columns):
        raise ExportError(f"{path} has non-numeric entries")

    expected_rows = grid.n_r * grid.n_theta
    if len(frame) != expected_rows:
        raise GridMismatchError(
            f"{path} has {len(frame)} rows, grid {grid.n_r}x{grid.n_theta} needs {expected_rows}"
        )
    r, theta = _node_columns(grid)
    offset = max(
        float(np.max(np.abs(frame["r"].to_numpy() - r))),
        float(np.max(np.abs(frame["theta"].to_numpy() - theta))),
    )
    if offset > COORDINATE_TOLERANCE * max(1.0, grid.d):
        raise GridMismatchError(f"{path} was sampled on different nodes (offset {offset:.2e})")
    logger.info(f"Read {len(frame)} rows from {path}")
    return frame


def read_field_csv(path: PathLike, grid: Grid) -> VectorField:
    """Read a ``r,theta,comp_r,comp_theta`` table sampled on ``grid`` (r outer, theta inner)."""
    frame = _read_grid_csv(path, grid, FIELD_COLUMNS)
    return VectorField(
        grid,
        frame["comp_r"].to_numpy(dtype=float).reshape(grid.shape),
        frame["comp_theta"].to_numpy(dtype=float).reshape(grid.shape),
    )


def read_stream_csv(path: PathLike, grid: Grid) -> StreamFunction:
    frame = _read_grid_csv(path, grid, STREAM_COLUMNS)
    return StreamFunction(grid, frame["psi"].to_numpy(dtype=float).reshape(grid.shape))


def write_json(payload: Any, path: PathLike) -> Path:
    return write_text(json_text(payload), path)


def scan_csv_text(result: ScanResult) -> str:
    return csv_text(result.to_dataframe())


def write_scan_csv(result: ScanResult, path: PathLike) -> Path:
    return write_text(scan_csv_text(result), path)


def emit_target(path: Optional[PathLike]) -> Optional[Path]:
    """Normalize an output path setting; empty means standard output."""
    if path is None or str(path) == "":
        return None
    return Path(path)

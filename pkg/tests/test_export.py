import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from conftest import random_perturbation
from zclab.exceptions import ExportError, GridMismatchError
from zclab.export import (
    FIELD_COLUMNS,
    csv_text,
    emit_target,
    field_frame,
    json_text,
    read_field_csv,
    read_stream_csv,
    scan_csv_text,
    sidecar_path,
    write_field_csv,
    write_profile_csv,
    write_stream_csv,
    write_text,
)
from zclab.fields import StreamFunction, from_stream, norm
from zclab.models import SCAN_COLUMNS, ScanResult
from zclab.surface import build_profile


def test_csv_text_uses_full_precision():
    text = csv_text(pd.DataFrame({"x": [0.1, 2.0]}))
    assert text == "x\n0.10000000000000001\n2\n"


def test_json_text_converts_numpy_values():
    payload = {"value": np.float64(1.5), "items": np.arange(2), "ok": np.bool_(True)}
    assert json.loads(json_text(payload)) == {"value": 1.5, "items": [0, 1], "ok": True}
    assert json_text({"a": 1}) == '{\n  "a": 1\n}\n'


def test_profile_csv_and_sidecar(tmp_path):
    profile = build_profile(2.0, 33)
    path = write_profile_csv(profile, tmp_path / "out" / "profile.csv")
    assert sidecar_path(path) == tmp_path / "out" / "profile.meta.json"

    table = pd.read_csv(path, float_precision="round_trip")
    assert list(table.columns) == ["r", "c1", "c2", "c1_dot", "c2_dot"]
    np.testing.assert_array_equal(table["r"].to_numpy(), profile.r_nodes)
    np.testing.assert_array_equal(table["c1"].to_numpy(), profile.c1)

    meta = json.loads(sidecar_path(path).read_text())
    assert meta == {"s": 2.0, "d": profile.d, "n_r": 33}


def test_field_csv_layout(coarse_grid, tmp_path):
    Y = random_perturbation(coarse_grid, seed=1)
    frame = field_frame(Y)
    assert list(frame.columns) == FIELD_COLUMNS
    assert len(frame) == coarse_grid.n_r * coarse_grid.n_theta
    # r outer, theta inner
    assert frame["r"].iloc[0] == frame["r"].iloc[coarse_grid.n_theta - 1]
    assert frame["theta"].iloc[1] == coarse_grid.theta[1]

    path = write_field_csv(Y, tmp_path / "field.csv")
    back = read_field_csv(path, coarse_grid)
    np.testing.assert_array_equal(back.comp_r, Y.comp_r)
    np.testing.assert_array_equal(back.comp_theta, Y.comp_theta)


def test_stream_csv_feeds_from_stream(coarse_grid, tmp_path):
    R, T = np.meshgrid(coarse_grid.profile.r_nodes, coarse_grid.theta, indexing="ij")
    psi = StreamFunction(coarse_grid, np.exp(-4 * R**2) * np.sin(2 * T))
    path = write_stream_csv(psi, tmp_path / "psi.csv")
    Y = from_stream(read_stream_csv(path, coarse_grid))
    assert norm(Y - from_stream(psi)) == 0.0


def test_read_errors(coarse_grid, tmp_path):
    with pytest.raises(ExportError):
        read_field_csv(tmp_path / "missing.csv", coarse_grid)

    Y = random_perturbation(coarse_grid, seed=2)
    frame = field_frame(Y)

    partial = tmp_path / "partial.csv"
    frame.drop(columns=["comp_theta"]).to_csv(partial, index=False)
    with pytest.raises(ExportError):
        read_field_csv(partial, coarse_grid)

    short = tmp_path / "short.csv"
    frame.iloc[:-1].to_csv(short, index=False)
    with pytest.raises(GridMismatchError):
        read_field_csv(short, coarse_grid)

    shifted = tmp_path / "shifted.csv"
    moved = frame.copy()
    moved["theta"] = moved["theta"] + 1e-3
    moved.to_csv(shifted, index=False)
    with pytest.raises(GridMismatchError):
        read_field_csv(shifted, coarse_grid)

    words = tmp_path / "words.csv"
    bad = frame.astype({"comp_r": object})
    bad.loc[0, "comp_r"] = "north"
    bad.to_csv(words, index=False)
    with pytest.raises(ExportError):
        read_field_csv(words, coarse_grid)

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ExportError):
        read_stream_csv(empty, coarse_grid)


def test_write_failures(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    with pytest.raises(ExportError):
        write_text("data", blocker / "inner" / "out.json")


def test_emit_target():
    assert emit_target(None) is None
    assert emit_target("") is None
    assert emit_target("out.json") == Path("out.json")


def test_empty_scan_table():
    text = scan_csv_text(ScanResult(rows=[], status=[], failed_rows=[]))
    assert text == ",".join(SCAN_COLUMNS) + "\n"

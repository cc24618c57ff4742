"""On-disk series format: a JSON manifest plus raw little-endian float payload
files in [T, V, H, W] order, one payload per fixed-length chunk.

The manifest records the catalog, grid, dtype, time axis and a sha256 per
chunk, so readers can detect version drift, truncation and bit corruption.
Reads reproduce written values bit-exactly.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import VariableCatalog
from .dataset import StateTensor
from .errors import DataFormatError, UsageError
from .grids import LatLonGrid

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
_DTYPES = {"float32": "<f4", "float64": "<f8"}


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_series(path: str | Path, series: Sequence[StateTensor], grid: LatLonGrid,
                 catalog: VariableCatalog, dtype: str = "float32",
                 chunk_steps: int = 1464, extra: dict | None = None) -> Path:
    """Write a series to a directory. chunk_steps defaults to a year of
    6-hourly snapshots per payload file."""
    if dtype not in _DTYPES:
        raise UsageError(f"dtype must be one of {sorted(_DTYPES)}")
    if not series:
        raise UsageError("refusing to write an empty series")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    v, h, w = series[0].shape
    times = [s.valid_time for s in series]
    step = times[1] - times[0] if len(times) > 1 else 6
    if any(t != times[0] + i * step for i, t in enumerate(times)):
        raise UsageError("series time axis must be uniform")

    chunks = []
    for start in range(0, len(series), chunk_steps):
        block = series[start:start + chunk_steps]
        payload = np.stack([s.values for s in block]).astype(_DTYPES[dtype]).tobytes(order="C")
        fname = f"chunk_{len(chunks):04d}.bin"
        (path / fname).write_bytes(payload)
        chunks.append({"file": fname, "t_start": start, "n_steps": len(block),
                       "sha256": _sha256(payload)})

    manifest = {
        "format_version": FORMAT_VERSION,
        "dtype": dtype,
        "n_channels": v,
        "grid": grid.to_dict(),
        "catalog": catalog.to_dict(),
        "time": {"start_hours": times[0], "step_hours": step, "n_steps": len(series)},
        "normalized": bool(series[0].normalized),
        "chunks": chunks,
    }
    if extra:
        manifest["extra"] = extra
    (path / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path: str | Path) -> dict:
    path = Path(path)
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.exists():
        raise DataFormatError(f"no {MANIFEST_NAME} in {path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise DataFormatError(f"manifest is not valid JSON: {e}") from e
    if manifest.get("format_version") != FORMAT_VERSION:
        raise DataFormatError(
            f"format version {manifest.get('format_version')} != supported {FORMAT_VERSION}")
    return manifest


def read_series(path: str | Path) -> tuple[list[StateTensor], LatLonGrid, VariableCatalog]:
    """Read a series directory, verifying chunk checksums and sizes."""
    path = Path(path)
    manifest = read_manifest(path)
    catalog = VariableCatalog.from_dict(manifest["catalog"])
    grid = LatLonGrid.from_dict(manifest["grid"])
    v = manifest["n_channels"]
    if v != catalog.n_channels:
        raise DataFormatError(
            f"manifest channel count {v} != catalog channel count {catalog.n_channels}")
    h, w = grid.n_lat, grid.n_lon
    dtype = manifest["dtype"]
    if dtype not in _DTYPES:
        raise DataFormatError(f"unsupported dtype {dtype!r}")
    itemsize = np.dtype(_DTYPES[dtype]).itemsize
    time = manifest["time"]
    normalized = manifest["normalized"]

    series: list[StateTensor] = []
    for chunk in manifest["chunks"]:
        fpath = path / chunk["file"]
        if not fpath.exists():
            raise DataFormatError(f"missing payload file {chunk['file']}")
        payload = fpath.read_bytes()
        expected_bytes = chunk["n_steps"] * v * h * w * itemsize
        if len(payload) != expected_bytes:
            raise DataFormatError(
                f"{chunk['file']}: {len(payload)} bytes, expected {expected_bytes} (truncated?)")
        if _sha256(payload) != chunk["sha256"]:
            raise DataFormatError(f"{chunk['file']}: checksum mismatch")
        values = np.frombuffer(payload, dtype=_DTYPES[dtype]).reshape(
            chunk["n_steps"], v, h, w)
        for i in range(chunk["n_steps"]):
            t = time["start_hours"] + (chunk["t_start"] + i) * time["step_hours"]
            series.append(StateTensor(values=values[i].copy(), valid_time=t,
                                      normalized=normalized))
    if len(series) != time["n_steps"]:
        raise DataFormatError(
            f"chunks cover {len(series)} steps, manifest declares {time['n_steps']}")
    return series, grid, catalog

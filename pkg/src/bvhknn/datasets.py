"""Dataset ingestion for the experiment drivers.

A dataset file is a flat sequence of records; the first n records become
data points and the next q become queries.  Supported formats:

* ``csv-xyz``    one point per line, "x,y,z"
* ``bin-f32x4``  packed little-endian float32 records of 4 values, the
                 first 3 used (LiDAR-style x,y,z,intensity dumps)
* ``csv-2d``     one point per line, "x,y"
* ``bits``       one bit string per line, length 1..3, mapped to unit-cube
                 vertices on load

All 32-bit input is widened to float64.  Parse errors report the 1-based
record index; non-finite values are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pipeline import Transform, transform_points

FORMATS = ("csv-xyz", "bin-f32x4", "csv-2d", "bits")


@dataclass(frozen=True)
class DatasetFile:
    """Where and how to read a dataset: path, format, and the n/q split."""

    path: str
    format: str
    n: int
    q: int

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; expected one of {FORMATS}")
        if self.n < 1 or self.q < 0:
            raise ValueError(f"need n >= 1 and q >= 0, got n={self.n} q={self.q}")


def _parse_csv(path: str, columns: int) -> np.ndarray:
    rows = []
    record = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            record += 1
            parts = text.split(",")
            if len(parts) != columns:
                raise ValueError(
                    f"record {record} (line {lineno}): expected {columns} fields, got {len(parts)}"
                )
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise ValueError(f"record {record} (line {lineno}): not a number: {text!r}") from None
    arr = np.asarray(rows, dtype=np.float64).reshape(len(rows), columns)
    bad = np.flatnonzero(~np.isfinite(arr).all(axis=1))
    if bad.size:
        raise ValueError(f"record {bad[0] + 1}: non-finite value")
    return arr


def _parse_bin_f32x4(path: str) -> np.ndarray:
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 4 != 0:
        raise ValueError(
            f"record {raw.size // 4 + 1}: truncated (file holds {raw.size} floats, not a multiple of 4)"
        )
    pts = raw.reshape(-1, 4)[:, :3].astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(pts).all(axis=1))
    if bad.size:
        raise ValueError(f"record {bad[0] + 1}: non-finite value")
    return pts


def _parse_bits(path: str) -> np.ndarray:
    strings = []
    record = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            record += 1
            if not 1 <= len(text) <= 3 or set(text) - {"0", "1"}:
                raise ValueError(f"record {record} (line {lineno}): bad bit string {text!r}")
            strings.append(text)
    return transform_points([Transform.HAMMING_VERTEX], strings, label="record")


def read_records(path: str, format: str) -> np.ndarray:
    """Every record in the file, as an (m, 3) or (m, 2) float64 array."""
    if format == "csv-xyz":
        return _parse_csv(path, 3)
    if format == "csv-2d":
        return _parse_csv(path, 2)
    if format == "bin-f32x4":
        return _parse_bin_f32x4(path)
    if format == "bits":
        return _parse_bits(path)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def load_dataset(file: DatasetFile) -> tuple[np.ndarray, np.ndarray]:
    """Split a file into (data, queries): first n records, then the next q."""
    records = read_records(file.path, file.format)
    need = file.n + file.q
    if need > len(records):
        raise ValueError(
            f"insufficient records in {file.path}: need {need} (n={file.n} + q={file.q}), "
            f"file has {len(records)}"
        )
    return records[: file.n].copy(), records[file.n : need].copy()


def synthetic_points(n: int, seed: int, dim: int = 3, kind: str = "uniform") -> np.ndarray:
    """Seeded uniform draws in [0, 1)^dim ("uniform") or cube vertices ("bits")."""
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.random((n, dim))
    if kind == "bits":
        return rng.integers(0, 2, size=(n, 3)).astype(np.float64)
    raise ValueError(f"unknown synthetic kind {kind!r}")

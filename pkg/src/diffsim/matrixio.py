"""Bit-exact matrix file format plus a CSV fallback.

Binary layout (little-endian throughout):

    offset  size  field
    0       4     magic "RSM1"
    4       4     format version, unsigned 32-bit (currently 1)
    8       8     rows, unsigned 64-bit
    16      8     cols, unsigned 64-bit
    24      -     payload: rows*cols IEEE-754 float64 values, row-major

The payload length must be exactly rows*cols*8 bytes with nothing trailing,
and every value must be finite.  Files with a ``.csv`` extension are parsed
as comma-separated rows of decimal reals instead.  Writes are atomic
(temporary file in the target directory, then rename).
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, ValidationError
from .kernels import RepMatrix

MAGIC = b"RSM1"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
HEADER_SIZE = _HEADER.size  # 24 bytes


def _check_finite(data: np.ndarray, path: Path) -> None:
    if np.all(np.isfinite(data)):
        return
    bad = np.argwhere(~np.isfinite(data))[0]
    raise DataError(f"{path}: non-finite value at row {int(bad[0])}, col {int(bad[1])}")


def _read_csv(path: Path) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno + 1}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: empty CSV matrix")
    width = len(rows[0])
    for lineno, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(
                f"{path}: line {lineno + 1} has {len(row)} columns, expected {width}"
            )
    return np.array(rows, dtype=np.float64)


def _read_binary(path: Path) -> np.ndarray:
    blob = path.read_bytes()
    if len(blob) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header ({len(blob)} of {HEADER_SIZE} bytes)")
    magic, version, rows, cols = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r} at offset 0")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version} at offset 4")
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: degenerate dimensions {rows}x{cols} in header")
    expected = rows * cols * 8
    actual = len(blob) - HEADER_SIZE
    if actual != expected:
        raise FormatError(
            f"{path}: payload is {actual} bytes at offset {HEADER_SIZE}, "
            f"expected {expected} for {rows}x{cols}"
        )
    data = np.frombuffer(blob, dtype="<f8", offset=HEADER_SIZE).reshape(rows, cols)
    return data.astype(np.float64, copy=True)


def read_array(path: str | Path) -> np.ndarray:
    """Read a matrix file (binary, or CSV by extension) into a float64 array."""
    path = Path(path)
    data = _read_csv(path) if path.suffix.lower() == ".csv" else _read_binary(path)
    _check_finite(data, path)
    return data


def read_matrix(path: str | Path) -> RepMatrix:
    """Read a matrix file and validate it as a representation matrix."""
    return RepMatrix(read_array(path))


def write_matrix(m: RepMatrix | np.ndarray, path: str | Path) -> None:
    """Write a matrix in the binary format, atomically."""
    data = m.data if isinstance(m, RepMatrix) else np.asarray(m, dtype=np.float64)
    if data.ndim != 2:
        raise ValidationError(f"can only write 2-D matrices, got shape {data.shape}")
    rows, cols = data.shape
    if rows < 2:
        raise ValidationError(f"matrix must have at least 2 rows, got {rows}")
    if cols < 1:
        raise ValidationError("matrix must have at least 1 column")
    if not np.all(np.isfinite(data)):
        raise ValidationError("refusing to write non-finite values")
    path = Path(path)
    payload = np.ascontiguousarray(data, dtype="<f8").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, rows, cols)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise

"""PCPM binary matrix files, the on-disk interchange format for the repo.

Layout: magic bytes ``PCPM``, version u32 = 1, rows u64, cols u64, then
rows*cols IEEE-754 binary64 values in row-major order. All integers and
floats are little-endian.
"""

import struct
from pathlib import Path

import numpy as np

from .linalg import ensure_matrix

MAGIC = b"PCPM"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def save_matrix(M: np.ndarray, path) -> None:
    M = ensure_matrix(M)
    rows, cols = M.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, rows, cols))
        fh.write(np.ascontiguousarray(M, dtype="<f8").tobytes())


def load_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated PCPM header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported PCPM version {version}")
    expected = _HEADER.size + rows * cols * 8
    if len(raw) != expected:
        raise ValueError(
            f"{path}: payload size mismatch, expected {expected} bytes, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=rows * cols)
    M = data.reshape(rows, cols).astype(np.float64)
    return ensure_matrix(M, name=str(path))

"""Flat binary layout for embedding grids and token matrices.

Layout: 16-byte header (4-byte magic ``PEG1`` + rows, cols, dim as
little-endian uint32) followed by the payload as row-major, channel-last,
little-endian float64.  Token matrices are stored as a grid with a single
row: (1, count, dim).
"""

from __future__ import annotations

import struct

import numpy as np

from .patches import PosEmbedGrid

MAGIC = b"PEG1"
_HEADER = struct.Struct("<4sIII")


def grid_to_bytes(grid: PosEmbedGrid) -> bytes:
    header = _HEADER.pack(MAGIC, grid.rows, grid.cols, grid.dim)
    payload = np.ascontiguousarray(grid.values, dtype="<f8").tobytes()
    return header + payload


def grid_from_bytes(data: bytes) -> PosEmbedGrid:
    if len(data) < _HEADER.size:
        raise ValueError("truncated grid file: missing header")
    magic, rows, cols, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
    expected = _HEADER.size + rows * cols * dim * 8
    if len(data) != expected:
        raise ValueError(f"grid file size {len(data)} != expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(rows, cols, dim)
    return PosEmbedGrid(values=values.astype(np.float64))


def tokens_to_bytes(tokens: np.ndarray) -> bytes:
    tokens = np.asarray(tokens, dtype=np.float64)
    if tokens.ndim != 2:
        raise ValueError("token matrix must be 2D (count, dim)")
    return grid_to_bytes(PosEmbedGrid(values=tokens[None, :, :]))


def tokens_from_bytes(data: bytes) -> np.ndarray:
    grid = grid_from_bytes(data)
    if grid.rows != 1:
        raise ValueError(f"token matrix file must have a single row, got {grid.rows}")
    return grid.values[0]

"""PCLD binary point-cloud file format.

Layout: magic b"PCLD", uint32 little-endian point count N, then N*3
float32 little-endian (x, y, z) triples.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PCLD"


class PCLDError(ValueError):
    """Malformed PCLD payload."""


def write_pcld(path: str | Path, points: np.ndarray) -> None:
    """Write an (N, 3) coordinate array as a PCLD file (float32 LE)."""
    pts = np.asarray(points, dtype="<f4")
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise PCLDError(f"expected (N, 3) points, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise PCLDError("non-finite coordinate")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", pts.shape[0]))
        fh.write(pts.tobytes(order="C"))


def read_pcld(path: str | Path) -> np.ndarray:
    """Read a PCLD file into an (N, 3) float32 array.

    Raises PCLDError on bad magic, truncated payload, trailing bytes or
    non-finite coordinates.
    """
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise PCLDError(f"bad magic in {path}: {raw[:4]!r}")
    if len(raw) < 8:
        raise PCLDError(f"truncated header in {path}")
    (count,) = struct.unpack("<I", raw[4:8])
    payload = raw[8:]
    expected = count * 12
    if len(payload) != expected:
        raise PCLDError(
            f"truncated payload in {path}: header says {count} points "
            f"({expected} bytes), found {len(payload)} bytes"
        )
    pts = np.frombuffer(payload, dtype="<f4").reshape(count, 3)
    if not np.isfinite(pts).all():
        raise PCLDError(f"non-finite coordinate in {path}")
    return pts.copy()

"""OFF mesh ingestion and area-proportional surface sampling."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class OFFError(ValueError):
    """Malformed OFF file or degenerate mesh."""


def read_off(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Parse an OFF mesh into (vertices (V,3) float64, triangles (T,3) int).

    Polygon faces with more than three vertices are fan-triangulated.
    Handles both "OFF\\n<counts>" and the one-line "OFF <counts>" variant.
    """
    tokens: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or not tokens[0].upper().startswith("OFF"):
        raise OFFError(f"missing OFF header in {path}")
    # "OFF" may be fused with the first count ("OFF3 3 0" is not standard,
    # but "OFF" followed by counts on the same line is common).
    rest = tokens[1:] if tokens[0].upper() == "OFF" else [tokens[0][3:]] + tokens[1:]
    if len(rest) < 3:
        raise OFFError(f"missing counts in {path}")
    nv, nf = int(rest[0]), int(rest[1])
    cursor = 3  # skip edge count
    values = rest[cursor:]
    if len(values) < nv * 3:
        raise OFFError(f"truncated vertex list in {path}")
    verts = np.array(values[: nv * 3], dtype=np.float64).reshape(nv, 3)
    pos = nv * 3
    tris: list[tuple[int, int, int]] = []
    for _ in range(nf):
        if pos >= len(values):
            raise OFFError(f"truncated face list in {path}")
        k = int(values[pos])
        idx = [int(v) for v in values[pos + 1 : pos + 1 + k]]
        if len(idx) != k or k < 3:
            raise OFFError(f"malformed face in {path}")
        for j in range(1, k - 1):
            tris.append((idx[0], idx[j], idx[j + 1]))
        pos += 1 + k
    if not tris:
        raise OFFError(f"mesh has no faces: {path}")
    return verts, np.array(tris, dtype=np.int64)


def triangle_areas(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a = verts[tris[:, 0]]
    b = verts[tris[:, 1]]
    c = verts[tris[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def sample_mesh_surface(
    verts: np.ndarray, tris: np.ndarray, num_points: int, seed: int
) -> np.ndarray:
    """Sample `num_points` points area-proportionally over the triangles.

    Deterministic given the seed. Raises OFFError when the total surface
    area is zero (degenerate mesh).
    """
    areas = triangle_areas(verts, tris)
    total = float(areas.sum())
    if total <= 0.0:
        raise OFFError("degenerate mesh: zero total surface area")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(areas) / total
    picks = np.searchsorted(cum, rng.random(num_points), side="right")
    picks = np.minimum(picks, len(tris) - 1)
    a = verts[tris[picks, 0]]
    b = verts[tris[picks, 1]]
    c = verts[tris[picks, 2]]
    # uniform barycentric sampling via the sqrt trick
    r1 = np.sqrt(rng.random((num_points, 1)))
    r2 = rng.random((num_points, 1))
    pts = (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c
    return pts.astype(np.float32)

"""Farthest point sampling and k-nearest-neighbor queries.

Both operations pin an exact tie-breaking contract (smallest index wins)
and accumulate squared distances in 64-bit so an accelerated kernel can
reproduce them bit-for-bit. A native kernel, when present, is picked up by
a capability probe; everything falls back to the numpy reference.

All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

import ctypes
import os
from pathlib import Path

import numpy as np

_KERNEL_ENV = "POINTCIL_KERNEL_LIB"
_KERNEL_DISABLE_ENV = "POINTCIL_NO_KERNEL"


def _squared_distances(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, accumulated in float64 as dx*dx+dy*dy+dz*dz."""
    d = points.astype(np.float64) - np.asarray(center, dtype=np.float64)
    return d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2]


def farthest_point_sampling_reference(
    points: np.ndarray, num_samples: int, start_index: int = 0
) -> np.ndarray:
    """Greedy max-min farthest point sampling (numpy reference).

    Each selected index maximizes the distance to the already-selected set;
    ties go to the smallest index. Deterministic.
    """
    pts = np.asarray(points)
    n = pts.shape[0]
    if not 1 <= num_samples <= n:
        raise ValueError(f"num_samples {num_samples} out of range for {n} points")
    if not 0 <= start_index < n:
        raise ValueError(f"start_index {start_index} out of range for {n} points")
    selected = np.empty(num_samples, dtype=np.int64)
    selected[0] = start_index
    dist = _squared_distances(pts, pts[start_index])
    for i in range(1, num_samples):
        nxt = int(np.argmax(dist))  # first occurrence = smallest index on ties
        selected[i] = nxt
        np.minimum(dist, _squared_distances(pts, pts[nxt]), out=dist)
    return selected


def knn_query_reference(points: np.ndarray, center: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest points to `center`, ascending by (distance, index)."""
    pts = np.asarray(points)
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k {k} out of range for {n} points")
    d = _squared_distances(pts, center)
    order = np.argsort(d, kind="stable")  # stable: ties keep ascending index
    return order[:k].astype(np.int64)


# ---------------------------------------------------------------------------
# optional native kernel


def _probe_kernel() -> ctypes.CDLL | None:
    if os.environ.get(_KERNEL_DISABLE_ENV):
        return None
    candidates = []
    if os.environ.get(_KERNEL_ENV):
        candidates.append(Path(os.environ[_KERNEL_ENV]))
    root = Path(__file__).resolve().parents[3]
    for sub in ("kernels/target/release", "kernels/target/debug"):
        candidates.append(root / sub / "libpointcil_kernels.so")
    for cand in candidates:
        if cand.is_file():
            try:
                lib = ctypes.CDLL(str(cand))
                lib.fps_kernel.restype = ctypes.c_int32
                lib.fps_kernel.argtypes = [
                    ctypes.POINTER(ctypes.c_float),
                    ctypes.c_uint32,
                    ctypes.c_uint32,
                    ctypes.c_uint32,
                    ctypes.POINTER(ctypes.c_uint32),
                ]
                lib.knn_kernel.restype = ctypes.c_int32
                lib.knn_kernel.argtypes = [
                    ctypes.POINTER(ctypes.c_float),
                    ctypes.c_uint32,
                    ctypes.c_float,
                    ctypes.c_float,
                    ctypes.c_float,
                    ctypes.c_uint32,
                    ctypes.POINTER(ctypes.c_uint32),
                ]
                return lib
            except OSError:
                continue
    return None


_kernel_lib = _probe_kernel()

_KERNEL_ERRORS = {
    1: "parameter out of range",
    2: "non-finite coordinate",
}


def kernel_available() -> bool:
    return _kernel_lib is not None


def _check_rc(rc: int) -> None:
    if rc != 0:
        raise ValueError(f"kernel error: {_KERNEL_ERRORS.get(rc, rc)}")


def farthest_point_sampling_kernel(
    points: np.ndarray, num_samples: int, start_index: int = 0
) -> np.ndarray:
    if _kernel_lib is None:
        raise RuntimeError("native kernel not available")
    pts = np.ascontiguousarray(points, dtype=np.float32)
    out = np.empty(num_samples, dtype=np.uint32)
    rc = _kernel_lib.fps_kernel(
        pts.ctypes.data_as(ctypes.POINTER(ctypes.c_float)),
        ctypes.c_uint32(pts.shape[0]),
        ctypes.c_uint32(num_samples),
        ctypes.c_uint32(start_index),
        out.ctypes.data_as(ctypes.POINTER(ctypes.c_uint32)),
    )
    _check_rc(rc)
    return out.astype(np.int64)


def knn_query_kernel(points: np.ndarray, center: np.ndarray, k: int) -> np.ndarray:
    if _kernel_lib is None:
        raise RuntimeError("native kernel not available")
    pts = np.ascontiguousarray(points, dtype=np.float32)
    cx, cy, cz = (float(v) for v in np.asarray(center, dtype=np.float32))
    out = np.empty(k, dtype=np.uint32)
    rc = _kernel_lib.knn_kernel(
        pts.ctypes.data_as(ctypes.POINTER(ctypes.c_float)),
        ctypes.c_uint32(pts.shape[0]),
        ctypes.c_float(cx),
        ctypes.c_float(cy),
        ctypes.c_float(cz),
        ctypes.c_uint32(k),
        out.ctypes.data_as(ctypes.POINTER(ctypes.c_uint32)),
    )
    _check_rc(rc)
    return out.astype(np.int64)


# ---------------------------------------------------------------------------
# dispatching entry points


def farthest_point_sampling(
    points: np.ndarray, num_samples: int, start_index: int = 0
) -> np.ndarray:
    """FPS with automatic dispatch to the native kernel when loadable.

    Kernel and reference are index-identical by contract (64-bit squared
    distance accumulation, smallest-index tie-break); only float32 clouds
    are eligible for dispatch so the conversion never changes coordinates.
    """
    pts = np.asarray(points)
    if _kernel_lib is not None and pts.dtype == np.float32:
        if not 1 <= num_samples <= pts.shape[0]:
            raise ValueError(f"num_samples {num_samples} out of range for {pts.shape[0]} points")
        if not 0 <= start_index < pts.shape[0]:
            raise ValueError(f"start_index {start_index} out of range for {pts.shape[0]} points")
        return farthest_point_sampling_kernel(pts, num_samples, start_index)
    return farthest_point_sampling_reference(pts, num_samples, start_index)


def knn_query(points: np.ndarray, center: np.ndarray, k: int) -> np.ndarray:
    """kNN with automatic dispatch to the native kernel when loadable."""
    pts = np.asarray(points)
    if (
        _kernel_lib is not None
        and pts.dtype == np.float32
        and np.asarray(center).dtype == np.float32
    ):
        if not 1 <= k <= pts.shape[0]:
            raise ValueError(f"k {k} out of range for {pts.shape[0]} points")
        return knn_query_kernel(pts, center, k)
    return knn_query_reference(pts, center, k)


# ---------------------------------------------------------------------------
# batched variants used by the model forward pass


def farthest_point_sampling_batch(
    points: np.ndarray, num_samples: int, start_index: int = 0
) -> np.ndarray:
    """Vectorized FPS over a (B, U, 3) batch; matches the single-cloud path."""
    pts = np.asarray(points)
    bsz, n = pts.shape[0], pts.shape[1]
    if not 1 <= num_samples <= n:
        raise ValueError(f"num_samples {num_samples} out of range for {n} points")
    sel = np.empty((bsz, num_samples), dtype=np.int64)
    sel[:, 0] = start_index
    pts64 = pts.astype(np.float64)
    cur = pts64[:, start_index, :]  # (B, 3)
    d = pts64 - cur[:, None, :]
    dist = d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2]
    rows = np.arange(bsz)
    for i in range(1, num_samples):
        nxt = np.argmax(dist, axis=1)
        sel[:, i] = nxt
        d = pts64 - pts64[rows, nxt][:, None, :]
        np.minimum(dist, d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2], out=dist)
    return sel


def knn_query_batch(points: np.ndarray, centers: np.ndarray, k: int) -> np.ndarray:
    """Vectorized kNN: points (B, U, 3), centers (B, L, 3) -> (B, L, k) indices."""
    pts = np.asarray(points).astype(np.float64)
    ctr = np.asarray(centers).astype(np.float64)
    if not 1 <= k <= pts.shape[1]:
        raise ValueError(f"k {k} out of range for {pts.shape[1]} points")
    d = pts[:, None, :, :] - ctr[:, :, None, :]  # (B, L, U, 3)
    dist = d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2]
    order = np.argsort(dist, axis=-1, kind="stable")
    return order[..., :k].astype(np.int64)

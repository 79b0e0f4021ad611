"""Input validation helpers for the estimator API."""

from __future__ import annotations

import numpy as np

from .data.transforms import normalize_unit_sphere, resample_points


def check_point_clouds(X, num_points: int, normalize: bool = True) -> np.ndarray:
    """Coerce input clouds into a finite (n, num_points, 3) float32 array.

    Accepts a stacked array or a sequence of (U_i, 3) arrays; clouds whose
    point count differs from num_points are deterministically resampled
    with replacement.
    """
    if isinstance(X, np.ndarray) and X.ndim == 3:
        clouds = [X[i] for i in range(X.shape[0])]
    else:
        clouds = [np.asarray(c) for c in X]
    if len(clouds) == 0:
        raise ValueError("empty input")
    out = np.empty((len(clouds), num_points, 3), dtype=np.float32)
    for i, cloud in enumerate(clouds):
        if cloud.ndim != 2 or cloud.shape[1] != 3:
            raise ValueError(f"cloud {i} has shape {cloud.shape}, expected (U, 3)")
        if not np.isfinite(cloud).all():
            raise ValueError(f"cloud {i} contains non-finite coordinates")
        cloud = resample_points(cloud, num_points, seed=i)
        out[i] = normalize_unit_sphere(cloud) if normalize else cloud.astype(np.float32)
    return out


def check_labels(y, n_samples: int) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n_samples,):
        raise ValueError(f"labels shape {y.shape} does not match {n_samples} samples")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(y == y.astype(np.int64)):
            raise ValueError("labels must be integer class indices")
        y = y.astype(np.int64)
    if (y < 0).any():
        raise ValueError("labels must be non-negative")
    return y.astype(np.int64)

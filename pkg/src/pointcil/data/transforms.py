"""Point-cloud normalization, resampling and training-time augmentation."""

from __future__ import annotations

import numpy as np


def normalize_unit_sphere(points: np.ndarray) -> np.ndarray:
    """Center at the centroid and scale so the farthest point has norm 1.

    A cloud whose points all coincide maps to all-zeros. Idempotent up to
    floating rounding.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[0] < 1:
        raise ValueError("empty point cloud")
    centered = pts - pts.mean(axis=0, keepdims=True)
    radius = float(np.sqrt((centered**2).sum(axis=1).max()))
    if radius == 0.0:
        return np.zeros_like(pts, dtype=np.float32)
    return (centered / radius).astype(np.float32)


def resample_points(points: np.ndarray, num_points: int, seed: int) -> np.ndarray:
    """Resample a cloud to exactly `num_points` points (with replacement).

    Identity when the count already matches; deterministic given the seed.
    """
    pts = np.asarray(points)
    if pts.shape[0] == num_points:
        return pts
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, pts.shape[0], size=num_points)
    return pts[idx]


def rotate_about_z(points: np.ndarray, angle: float) -> np.ndarray:
    """Rotate around the up (z) axis by `angle` radians."""
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], dtype=points.dtype)
    return points @ rot.T


def jitter(points: np.ndarray, rng: np.random.Generator, sigma: float, clip: float) -> np.ndarray:
    """Add clipped Gaussian per-coordinate noise."""
    if clip < 0:
        raise ValueError("jitter_clip must be >= 0")
    noise = rng.normal(0.0, sigma, size=points.shape) if sigma > 0 else 0.0
    noise = np.clip(noise, -clip, clip)
    return (points + noise).astype(points.dtype)


def augment(
    points: np.ndarray,
    seed: int,
    rotate_z: bool = True,
    jitter_sigma: float = 0.01,
    jitter_clip: float = 0.05,
) -> np.ndarray:
    """Training augmentation: random z-rotation plus clipped Gaussian jitter.

    Deterministic given the seed; identity when rotate_z is off and
    jitter_sigma is 0.
    """
    rng = np.random.default_rng(seed)
    out = np.asarray(points, dtype=np.float32)
    if rotate_z:
        out = rotate_about_z(out, float(rng.uniform(0.0, 2.0 * np.pi)))
    if jitter_sigma > 0:
        out = jitter(out, rng, jitter_sigma, jitter_clip)
    return out

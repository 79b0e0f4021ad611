"""Procedural synthetic shape dataset — a desk-scale stand-in benchmark.

Eight parametric surface families (classes = shape kinds). Every sample is
deterministic given (dataset seed, kind, split, index) and is written as a
normalized PCLD file plus a manifest entry.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .manifest import DatasetManifest, SampleEntry, save_manifest
from .pcld import write_pcld
from .transforms import normalize_unit_sphere


def _sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    # antithetic pairs keep the sample centroid at exactly zero, so a
    # noiseless sphere stays the unit sphere after normalization; odd counts
    # get a zero-sum great-circle triple on top
    if n == 1:
        v = rng.normal(size=(1, 3))
        return v / np.linalg.norm(v)
    pairs = n // 2 if n % 2 == 0 else (n - 3) // 2
    half = rng.normal(size=(pairs, 3))
    half /= np.linalg.norm(half, axis=1, keepdims=True)
    pts = np.concatenate([half, -half], axis=0)
    if n % 2:
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        v = np.cross(u, rng.normal(size=3))
        v /= np.linalg.norm(v)
        angles = np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
        triple = np.outer(np.cos(angles), u) + np.outer(np.sin(angles), v)
        pts = np.concatenate([pts, triple], axis=0)
    return pts


def _unit_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v


def _cube(rng: np.random.Generator, n: int) -> np.ndarray:
    face = rng.integers(0, 6, size=n)
    uv = rng.uniform(-1.0, 1.0, size=(n, 2))
    pts = np.empty((n, 3))
    axis = face // 2
    sign = np.where(face % 2 == 0, 1.0, -1.0)
    for a in range(3):
        m = axis == a
        others = [b for b in range(3) if b != a]
        pts[m, a] = sign[m]
        pts[m, others[0]] = uv[m, 0]
        pts[m, others[1]] = uv[m, 1]
    return pts


def _cylinder(rng: np.random.Generator, n: int) -> np.ndarray:
    aspect = rng.uniform(1.2, 2.5)  # half-height / radius
    r, h = 1.0, aspect
    side_area = 2 * np.pi * r * 2 * h
    cap_area = 2 * np.pi * r * r
    p_side = side_area / (side_area + cap_area)
    on_side = rng.random(n) < p_side
    theta = rng.uniform(0, 2 * np.pi, size=n)
    pts = np.empty((n, 3))
    z = rng.uniform(-h, h, size=n)
    rad = np.sqrt(rng.random(n)) * r
    top = rng.random(n) < 0.5
    pts[:, 0] = np.where(on_side, r * np.cos(theta), rad * np.cos(theta))
    pts[:, 1] = np.where(on_side, r * np.sin(theta), rad * np.sin(theta))
    pts[:, 2] = np.where(on_side, z, np.where(top, h, -h))
    return pts


def _cone(rng: np.random.Generator, n: int) -> np.ndarray:
    height = rng.uniform(1.5, 2.5)
    slant = np.sqrt(1.0 + height * height)
    lat_area = np.pi * slant
    base_area = np.pi
    on_lat = rng.random(n) < lat_area / (lat_area + base_area)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    rad = np.sqrt(rng.random(n))  # area-uniform radial coordinate
    pts = np.empty((n, 3))
    pts[:, 0] = rad * np.cos(theta)
    pts[:, 1] = rad * np.sin(theta)
    pts[:, 2] = np.where(on_lat, height * (1.0 - rad), 0.0)
    return pts


def _torus(rng: np.random.Generator, n: int) -> np.ndarray:
    ratio = rng.uniform(2.5, 4.0)  # major / minor radius
    big, small = 1.0, 1.0 / ratio
    theta = rng.uniform(0, 2 * np.pi, size=n)
    # rejection-free weighting: accept phi with prob prop. to 1 + (r/R) cos phi
    phi = np.empty(n)
    filled = 0
    while filled < n:
        cand = rng.uniform(0, 2 * np.pi, size=2 * (n - filled))
        acc = rng.random(cand.shape[0]) < (1 + (small / big) * np.cos(cand)) / (1 + small / big)
        take = cand[acc][: n - filled]
        phi[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
    ring = big + small * np.cos(phi)
    return np.stack([ring * np.cos(theta), ring * np.sin(theta), small * np.sin(phi)], axis=1)


def _table(rng: np.random.Generator, n: int) -> np.ndarray:
    height = rng.uniform(0.8, 1.2)
    n_top = int(0.6 * n)
    pts = np.empty((n, 3))
    pts[:n_top, 0] = rng.uniform(-1, 1, size=n_top)
    pts[:n_top, 1] = rng.uniform(-1, 1, size=n_top)
    pts[:n_top, 2] = height
    legs = np.array([[0.85, 0.85], [0.85, -0.85], [-0.85, 0.85], [-0.85, -0.85]])
    which = rng.integers(0, 4, size=n - n_top)
    pts[n_top:, 0] = legs[which, 0] + rng.normal(0, 0.03, size=n - n_top)
    pts[n_top:, 1] = legs[which, 1] + rng.normal(0, 0.03, size=n - n_top)
    pts[n_top:, 2] = rng.uniform(0, height, size=n - n_top)
    return pts


def _chair(rng: np.random.Generator, n: int) -> np.ndarray:
    back_tilt = rng.uniform(-0.15, 0.15)
    n_seat = n // 2
    pts = np.empty((n, 3))
    pts[:n_seat, 0] = rng.uniform(-1, 1, size=n_seat)
    pts[:n_seat, 1] = rng.uniform(-1, 1, size=n_seat)
    pts[:n_seat, 2] = 0.0
    z = rng.uniform(0, 1.6, size=n - n_seat)
    pts[n_seat:, 0] = rng.uniform(-1, 1, size=n - n_seat)
    pts[n_seat:, 1] = 1.0 + back_tilt * z
    pts[n_seat:, 2] = z
    return pts


def _capsule(rng: np.random.Generator, n: int) -> np.ndarray:
    half = rng.uniform(0.8, 1.6)
    side_area = 2 * np.pi * 2 * half
    sphere_area = 4 * np.pi
    on_side = rng.random(n) < side_area / (side_area + sphere_area)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    pts = np.empty((n, 3))
    z = rng.uniform(-half, half, size=n)
    sph = _unit_sphere(rng, n)
    cap_z = half * np.sign(sph[:, 2])
    pts[:, 0] = np.where(on_side, np.cos(theta), sph[:, 0])
    pts[:, 1] = np.where(on_side, np.sin(theta), sph[:, 1])
    pts[:, 2] = np.where(on_side, z, sph[:, 2] + cap_z)
    return pts


SHAPE_GENERATORS = {
    "sphere": _sphere,
    "cube": _cube,
    "cylinder": _cylinder,
    "cone": _cone,
    "torus": _torus,
    "table": _table,
    "chair": _chair,
    "capsule": _capsule,
}

_SPLIT_CODES = {"train": 0, "test": 1}


def generate_shape(kind: str, num_points: int, noise_sigma: float, seed: int) -> np.ndarray:
    """One normalized sample of the given shape family (float32).

    Samples are canonically posed (up axis = z), mirroring aligned CAD
    benchmarks; per-sample shape parameters and noise provide the
    intra-class variation, and rotation enters via training augmentation.
    """
    if kind not in SHAPE_GENERATORS:
        raise ValueError(f"unknown shape kind {kind!r}")
    rng = np.random.default_rng(seed)
    pts = SHAPE_GENERATORS[kind](rng, num_points)
    if noise_sigma > 0:
        pts = pts + rng.normal(0.0, noise_sigma, size=pts.shape)
    return normalize_unit_sphere(pts)


def _recipe_seed(seed: int, class_index: int, split: str, index: int) -> int:
    ss = np.random.SeedSequence([seed, class_index, _SPLIT_CODES[split], index])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def generate_synthetic_dataset(
    out_dir: str | Path,
    spec: list[tuple[str, dict[str, int]]],
    num_points: int,
    noise_sigma: float,
    seed: int,
) -> DatasetManifest:
    """Generate PCLD files plus a manifest for the given shape spec.

    `spec` is a list of (shape kind, {"train": n, "test": n}) pairs; the
    shape kinds become the classes, in order. Byte-identical output for the
    same spec and seed.
    """
    if len(spec) < 2:
        raise ValueError("need at least 2 shape kinds")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    classes = []
    for kind, counts in spec:
        if kind not in SHAPE_GENERATORS:
            raise ValueError(f"unknown shape kind {kind!r}")
        if any(c < 1 for c in counts.values()):
            raise ValueError(f"counts must be >= 1, got {counts}")
        classes.append(kind)
    samples: list[SampleEntry] = []
    for cls, (kind, counts) in enumerate(spec):
        for split in ("train", "test"):
            for i in range(counts.get(split, 0)):
                sid = f"{kind}-{split}-{i:03d}"
                pts = generate_shape(
                    kind, num_points, noise_sigma, _recipe_seed(seed, cls, split, i)
                )
                fname = f"{sid}.pcld"
                write_pcld(out_dir / fname, pts)
                samples.append(SampleEntry(id=sid, class_index=cls, split=split, file=fname))
    manifest = DatasetManifest(classes=classes, samples=samples, root=out_dir)
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest

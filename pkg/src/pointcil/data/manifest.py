"""Dataset manifests: JSON schema, validation, and sample loading.

Manifest schema:
    {"classes": ["name", ...],
     "samples": [{"id": str, "class": int, "split": "train"|"test",
                  "file": str} | {..., "recipe": {...}}]}

Sample payloads come either from a PCLD file (path relative to the
manifest) or from a deterministic synthetic recipe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pcld import read_pcld
from .transforms import normalize_unit_sphere, resample_points

VALID_SPLITS = ("train", "test")


class ManifestError(ValueError):
    """Malformed or inconsistent manifest."""


@dataclass
class SampleEntry:
    id: str
    class_index: int
    split: str
    file: str | None = None
    recipe: dict | None = None


@dataclass
class DatasetManifest:
    classes: list[str]
    samples: list[SampleEntry]
    root: Path = field(default_factory=Path)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def split(self, split: str) -> list[SampleEntry]:
        return [s for s in self.samples if s.split == split]

    def to_dict(self) -> dict:
        out = {"classes": list(self.classes), "samples": []}
        for s in self.samples:
            entry: dict = {"id": s.id, "class": s.class_index, "split": s.split}
            if s.file is not None:
                entry["file"] = s.file
            else:
                entry["recipe"] = s.recipe
            out["samples"].append(entry)
        return out


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a manifest file.

    Raises ManifestError on parse failures, missing files, unresolvable
    recipes, duplicate ids, bad splits, or sparse class indices.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot parse manifest {path}: {exc}") from exc
    if not isinstance(doc, dict) or "classes" not in doc or "samples" not in doc:
        raise ManifestError(f"manifest {path} must have 'classes' and 'samples'")
    classes = list(doc["classes"])
    samples: list[SampleEntry] = []
    seen_ids: set[str] = set()
    used_classes: set[int] = set()
    for raw in doc["samples"]:
        sid = str(raw["id"])
        if sid in seen_ids:
            raise ManifestError(f"duplicate sample id {sid!r}")
        seen_ids.add(sid)
        cls = int(raw["class"])
        if not 0 <= cls < len(classes):
            raise ManifestError(f"sample {sid!r}: class index {cls} out of range")
        used_classes.add(cls)
        split = raw.get("split")
        if split not in VALID_SPLITS:
            raise ManifestError(f"sample {sid!r}: bad split {split!r}")
        entry = SampleEntry(
            id=sid,
            class_index=cls,
            split=split,
            file=raw.get("file"),
            recipe=raw.get("recipe"),
        )
        if entry.file is None and entry.recipe is None:
            raise ManifestError(f"sample {sid!r}: needs 'file' or 'recipe'")
        if entry.file is not None and not (path.parent / entry.file).is_file():
            raise ManifestError(f"sample {sid!r}: missing file {entry.file}")
        if entry.recipe is not None:
            from .synthetic import SHAPE_GENERATORS  # local import avoids a cycle

            kind = entry.recipe.get("shape")
            if kind not in SHAPE_GENERATORS:
                raise ManifestError(f"sample {sid!r}: unresolvable recipe shape {kind!r}")
        samples.append(entry)
    if used_classes != set(range(len(classes))):
        raise ManifestError(
            f"sparse class indices: used {sorted(used_classes)} of {len(classes)} classes"
        )
    return DatasetManifest(classes=classes, samples=samples, root=path.parent)


def _sample_seed(sample_id: str) -> int:
    # stable per-id resample seed, independent of Python's hash randomization
    import zlib

    return zlib.crc32(sample_id.encode())


def load_sample(manifest: DatasetManifest, entry: SampleEntry, num_points: int) -> np.ndarray:
    """Materialize one sample as a normalized (num_points, 3) float32 cloud."""
    if entry.file is not None:
        pts = read_pcld(manifest.root / entry.file)
    else:
        from .synthetic import generate_shape

        r = entry.recipe
        pts = generate_shape(
            r["shape"],
            num_points=int(r.get("num_points", num_points)),
            noise_sigma=float(r.get("noise_sigma", 0.0)),
            seed=int(r["seed"]),
        )
    pts = resample_points(pts, num_points, seed=_sample_seed(entry.id))
    return normalize_unit_sphere(pts)


@dataclass
class ArrayDataset:
    """In-memory dataset: stacked clouds, labels in manifest order."""

    points: np.ndarray  # (N, U, 3) float32
    labels: np.ndarray  # (N,) int64
    ids: list[str]

    def __len__(self) -> int:
        return len(self.ids)

    def subset(self, mask: np.ndarray) -> "ArrayDataset":
        idx = np.flatnonzero(mask)
        return ArrayDataset(self.points[idx], self.labels[idx], [self.ids[i] for i in idx])

    def select_ids(self, wanted: list[str]) -> "ArrayDataset":
        pos = {sid: i for i, sid in enumerate(self.ids)}
        idx = np.array([pos[w] for w in wanted], dtype=np.int64)
        return ArrayDataset(self.points[idx], self.labels[idx], list(wanted))


def load_split(manifest: DatasetManifest, split: str, num_points: int) -> ArrayDataset:
    entries = manifest.split(split)
    pts = np.stack([load_sample(manifest, e, num_points) for e in entries], axis=0)
    labels = np.array([e.class_index for e in entries], dtype=np.int64)
    return ArrayDataset(pts, labels, [e.id for e in entries])

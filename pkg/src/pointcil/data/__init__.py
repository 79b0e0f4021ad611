from .manifest import (
    ArrayDataset,
    DatasetManifest,
    ManifestError,
    SampleEntry,
    load_manifest,
    load_sample,
    load_split,
    save_manifest,
)
from .off import OFFError, read_off, sample_mesh_surface, triangle_areas
from .pcld import PCLDError, read_pcld, write_pcld
from .sampling import (
    farthest_point_sampling,
    farthest_point_sampling_batch,
    farthest_point_sampling_reference,
    kernel_available,
    knn_query,
    knn_query_batch,
    knn_query_reference,
)
from .synthetic import SHAPE_GENERATORS, generate_shape, generate_synthetic_dataset
from .transforms import (
    augment,
    jitter,
    normalize_unit_sphere,
    resample_points,
    rotate_about_z,
)

__all__ = [
    "ArrayDataset",
    "DatasetManifest",
    "ManifestError",
    "OFFError",
    "PCLDError",
    "SHAPE_GENERATORS",
    "SampleEntry",
    "augment",
    "farthest_point_sampling",
    "farthest_point_sampling_batch",
    "farthest_point_sampling_reference",
    "generate_shape",
    "generate_synthetic_dataset",
    "jitter",
    "kernel_available",
    "knn_query",
    "knn_query_batch",
    "knn_query_reference",
    "load_manifest",
    "load_sample",
    "load_split",
    "normalize_unit_sphere",
    "read_off",
    "read_pcld",
    "resample_points",
    "rotate_about_z",
    "sample_mesh_surface",
    "save_manifest",
    "triangle_areas",
    "write_pcld",
]

import numpy as np
import pytest

from pointcil.data.sampling import (
    farthest_point_sampling_batch,
    farthest_point_sampling_reference,
    knn_query_batch,
    knn_query_reference,
)


def fps_oracle(points, num_samples, start_index=0):
    """Independent greedy max-min: per step, evaluate every candidate's
    distance to the selected set by explicit loops."""
    pts = np.asarray(points, dtype=np.float64)
    selected = [start_index]
    for _ in range(num_samples - 1):
        best_idx, best_dist = None, -1.0
        for cand in range(pts.shape[0]):
            d_min = min(
                float(
                    (pts[cand, 0] - pts[s, 0]) ** 2
                    + (pts[cand, 1] - pts[s, 1]) ** 2
                    + (pts[cand, 2] - pts[s, 2]) ** 2
                )
                for s in selected
            )
            if d_min > best_dist:  # strict: ties keep the smaller index
                best_idx, best_dist = cand, d_min
        selected.append(best_idx)
    return np.array(selected)


def knn_oracle(points, center, k):
    pts = np.asarray(points, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    keyed = sorted(
        (float((p[0] - c[0]) ** 2 + (p[1] - c[1]) ** 2 + (p[2] - c[2]) ** 2), i)
        for i, p in enumerate(pts)
    )
    return np.array([i for _, i in keyed[:k]])


def test_fps_collinear_case():
    pts = np.array([[0, 0, 0], [1, 0, 0], [10, 0, 0]], dtype=np.float64)
    result = farthest_point_sampling_reference(pts, 2, start_index=0)
    assert list(result) == [0, 2]
    assert list(fps_oracle(pts, 2)) == [0, 2]


def test_fps_exhaustion_starts_at_start_index():
    pts = np.random.default_rng(0).normal(size=(9, 3))
    result = farthest_point_sampling_reference(pts, 9, start_index=4)
    assert result[0] == 4
    assert sorted(result) == list(range(9))


def test_fps_tie_smaller_index():
    # points 1 and 2 coincide and are both farthest from the start
    pts = np.array([[0, 0, 0], [5, 0, 0], [5, 0, 0], [1, 0, 0]], dtype=np.float64)
    result = farthest_point_sampling_reference(pts, 2, start_index=0)
    assert list(result) == [0, 1]


def test_fps_out_of_range():
    pts = np.zeros((4, 3))
    with pytest.raises(ValueError):
        farthest_point_sampling_reference(pts, 5)
    with pytest.raises(ValueError):
        farthest_point_sampling_reference(pts, 0)
    with pytest.raises(ValueError):
        farthest_point_sampling_reference(pts, 2, start_index=4)


def test_fps_matches_oracle_randomized():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(2, 64))
        pts = rng.normal(size=(n, 3))
        if rng.random() < 0.3:  # force duplicate points to exercise ties
            pts[rng.integers(n)] = pts[rng.integers(n)]
        num = int(rng.integers(1, n + 1))
        start = int(rng.integers(n))
        got = farthest_point_sampling_reference(pts, num, start)
        want = fps_oracle(pts, num, start)
        assert np.array_equal(got, want)


def test_knn_collinear_case():
    pts = np.array([[1, 0, 0], [2, 0, 0], [3, 0, 0]], dtype=np.float64)
    result = knn_query_reference(pts, np.zeros(3), 2)
    assert list(result) == [0, 1]
    assert list(knn_oracle(pts, np.zeros(3), 2)) == [0, 1]


def test_knn_full_ordering():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(20, 3))
    center = rng.normal(size=3)
    result = knn_query_reference(pts, center, 20)
    assert np.array_equal(result, knn_oracle(pts, center, 20))


def test_knn_equidistant_tie():
    pts = np.array([[0, 0, 1], [0, 0, -1], [0, 0, 5]], dtype=np.float64)
    result = knn_query_reference(pts, np.zeros(3), 1)
    assert list(result) == [0]


def test_knn_out_of_range():
    pts = np.zeros((4, 3))
    with pytest.raises(ValueError):
        knn_query_reference(pts, np.zeros(3), 5)
    with pytest.raises(ValueError):
        knn_query_reference(pts, np.zeros(3), 0)


def test_knn_matches_oracle_randomized():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 256))
        pts = rng.normal(size=(n, 3))
        if n > 2 and rng.random() < 0.3:
            pts[0] = pts[1]  # equidistant pair
        center = rng.normal(size=3)
        k = int(rng.integers(1, n + 1))
        got = knn_query_reference(pts, center, k)
        want = knn_oracle(pts, center, k)
        assert np.array_equal(got, want)


def test_batch_variants_match_single():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(5, 40, 3)).astype(np.float32)
    num = 7
    batch_fps = farthest_point_sampling_batch(pts, num, start_index=2)
    for b in range(5):
        assert np.array_equal(batch_fps[b], farthest_point_sampling_reference(pts[b], num, 2))
    centers = rng.normal(size=(5, 6, 3)).astype(np.float32)
    batch_knn = knn_query_batch(pts, centers, 4)
    for b in range(5):
        for l in range(6):
            assert np.array_equal(
                batch_knn[b, l], knn_query_reference(pts[b], centers[b, l], 4)
            )


def test_determinism():
    rng = np.random.default_rng(9)
    pts = rng.normal(size=(50, 3))
    a = farthest_point_sampling_reference(pts, 10)
    b = farthest_point_sampling_reference(pts, 10)
    assert np.array_equal(a, b)

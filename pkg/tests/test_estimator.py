import numpy as np
import pytest
from sklearn.base import clone

from pointcil.data.synthetic import generate_shape
from pointcil.estimator import IncrementalPointCloudClassifier

SHAPES = ["sphere", "cube", "cylinder", "torus"]


def make_clouds(classes, per_class=6, num_points=32, seed=0):
    X, y = [], []
    for k in classes:
        for i in range(per_class):
            X.append(generate_shape(SHAPES[k], num_points, 0.02, seed * 1000 + k * 50 + i))
            y.append(k)
    return np.stack(X), np.array(y)


def small_estimator(**overrides):
    params = dict(
        num_structures=4,
        num_neighbors=4,
        num_points=32,
        batch_size=8,
        epochs=8,
        exemplar_budget=8,
        seed=0,
    )
    params.update(overrides)
    return IncrementalPointCloudClassifier(**params)


def test_get_set_params_roundtrip():
    est = small_estimator()
    params = est.get_params()
    assert params["num_points"] == 32
    est.set_params(epochs=3)
    assert est.epochs == 3
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_fit_predict_shapes():
    X, y = make_clouds([0, 1])
    est = small_estimator().fit(X, y)
    assert est.n_states_ == 1
    assert list(est.classes_) == [0, 1]
    preds = est.predict(X)
    assert preds.shape == (len(y),)
    assert set(preds) <= {0, 1}
    probs = est.predict_proba(X)
    assert probs.shape == (len(y), 2)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-5)


def test_fit_learns_separable_shapes():
    X, y = make_clouds([0, 1], per_class=12)
    est = small_estimator(epochs=30).fit(X, y)
    assert est.score(X, y) >= 0.9


def test_partial_fit_grows_classes():
    X1, y1 = make_clouds([0, 1])
    X2, y2 = make_clouds([2, 3])
    est = small_estimator()
    est.partial_fit(X1, y1)
    assert list(est.classes_) == [0, 1]
    est.partial_fit(X2, y2)
    assert list(est.classes_) == [0, 1, 2, 3]
    assert est.n_states_ == 2
    probs = est.predict_proba(X1)
    assert probs.shape == (len(y1), 4)


def test_partial_fit_rejects_seen_classes():
    X1, y1 = make_clouds([0, 1])
    est = small_estimator().partial_fit(X1, y1)
    with pytest.raises(ValueError, match="overlap"):
        est.partial_fit(X1, y1)


def test_predict_before_fit_raises():
    est = small_estimator()
    X, _ = make_clouds([0])
    with pytest.raises(RuntimeError, match="not fitted"):
        est.predict(X)


def test_variable_size_clouds_are_resampled():
    rng = np.random.default_rng(0)
    X = [rng.normal(size=(n, 3)) for n in (20, 32, 50, 32)]
    y = np.array([0, 0, 1, 1])
    est = small_estimator(epochs=2).fit(X, y)
    assert est.predict(X).shape == (4,)


def test_invalid_inputs_rejected():
    est = small_estimator()
    with pytest.raises(ValueError):
        est.fit(np.zeros((2, 5, 2)), np.array([0, 1]))  # not 3-coordinate points
    bad = np.zeros((2, 32, 3))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError, match="finite"):
        est.fit(bad, np.array([0, 1]))
    with pytest.raises(ValueError):
        est.fit(np.zeros((2, 32, 3)), np.array([0.5, 1.2]))


def test_determinism_same_seed():
    X, y = make_clouds([0, 1])
    p1 = small_estimator(epochs=3).fit(X, y).predict_proba(X)
    p2 = small_estimator(epochs=3).fit(X, y).predict_proba(X)
    assert np.array_equal(p1, p2)

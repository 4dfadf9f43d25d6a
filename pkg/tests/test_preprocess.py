import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dualkernel.errors import FormatError, InvalidInputError
from dualkernel.preprocess import (
    Dataset, Stage, apply_pipeline, fit_minmax, fit_pca, fit_pipeline, fit_standardize,
    load_pipeline, save_pipeline,
)


def raw(x, labels=None):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return Dataset(x, np.zeros(len(x), int) if labels is None else labels)


def test_two_point_column():
    s = fit_standardize(raw([0.0, 2.0]))
    assert s.means[0] == 1.0 and s.stds[0] == 1.0
    np.testing.assert_array_equal(s.transform(raw([0.0, 2.0])).features[:, 0], [-1.0, 1.0])


def test_constant_column_maps_to_zero():
    s = fit_standardize(raw([5.0, 5.0, 5.0]))
    assert s.degenerate[0]
    np.testing.assert_array_equal(s.transform(raw([5.0, 5.0, 5.0])).features, 0.0)
    # test data off the constant still maps to zero
    np.testing.assert_array_equal(s.transform(raw([7.0])).features, 0.0)


def test_population_std():
    out = fit_standardize(raw([1.0, 2.0, 3.0])).transform(raw([1.0, 2.0, 3.0])).features[:, 0]
    z = 1.0 / math.sqrt(2.0 / 3.0)
    np.testing.assert_allclose(out, [-z, 0.0, z], atol=1e-12)
    np.testing.assert_allclose(out, [-1.2247, 0.0, 1.2247], atol=1e-4)


def test_standardize_errors():
    with pytest.raises(InvalidInputError):
        fit_standardize(Dataset(np.zeros((0, 3)), np.zeros(0, int)))
    with pytest.raises(InvalidInputError):
        fit_standardize(raw([1.0]))
    s = fit_standardize(raw(np.ones((3, 2))))
    with pytest.raises(InvalidInputError):
        s.transform(raw(np.ones((3, 3))))


def test_dataset_row_label_mismatch():
    with pytest.raises(InvalidInputError):
        Dataset(np.zeros((3, 2)), np.zeros(2, int))


@given(arrays(np.float64, (12, 4), elements=st.floats(-1e3, 1e3)))
@settings(max_examples=50, deadline=None)
def test_standardized_moments(x):
    s = fit_standardize(raw(x))
    z = s.transform(raw(x)).features
    assert np.all(np.abs(z.mean(axis=0)) < 1e-9)
    ok = ~s.degenerate
    np.testing.assert_allclose(z[:, ok].std(axis=0), 1.0, atol=1e-9)


def _std(x):
    return Dataset(np.asarray(x, float), np.zeros(len(x), int), Stage.STANDARDIZED)


def test_pca_rank_one():
    t = np.linspace(-1, 1, 9)
    pca = fit_pca(_std(np.c_[t, t]), 2)
    np.testing.assert_allclose(pca.components[0], [1 / math.sqrt(2)] * 2, atol=1e-12)
    assert abs(pca.explained_variance[1]) < 1e-15


def test_pca_diagonal_covariance():
    # axis variances 4 and 1, uncorrelated by construction
    x = np.array([[2.0, 1.0], [-2.0, 1.0], [2.0, -1.0], [-2.0, -1.0]])
    pca = fit_pca(_std(x), 2)
    np.testing.assert_allclose(pca.components, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(pca.explained_variance, [4.0, 1.0], atol=1e-12)


def test_pca_errors():
    with pytest.raises(InvalidInputError):
        fit_pca(_std(np.ones((3, 2))), 3)
    with pytest.raises(InvalidInputError):
        fit_pca(raw(np.ones((3, 2))), 1)  # wrong stage


@given(arrays(np.float64, (15, 5), elements=st.floats(-10, 10)))
@settings(max_examples=40, deadline=None)
def test_pca_invariants(x):
    pca = fit_pca(_std(x), 5)
    np.testing.assert_allclose(pca.components @ pca.components.T, np.eye(5), atol=1e-9)
    assert np.all(np.diff(pca.explained_variance) <= 1e-12)
    rows = np.arange(5)
    pivots = np.argmax(np.abs(pca.components), axis=1)
    assert np.all(pca.components[rows, pivots] >= 0)
    scores = pca.transform(_std(x)).features
    np.testing.assert_allclose(pca.inverse_transform(scores), x, atol=1e-8)
    assert abs(pca.explained_variance.sum() - x.var(axis=0).sum()) < 1e-8
    d_in = np.linalg.norm(x[:, None] - x[None], axis=2)
    d_out = np.linalg.norm(scores[:, None] - scores[None], axis=2)
    np.testing.assert_allclose(d_out, d_in, atol=1e-9)


def test_minmax_clamp_and_constant():
    mm = fit_minmax(Dataset(np.array([[0.0, 3.0], [2.0, 3.0]]), [0, 0], Stage.PCA))
    out = mm.transform(Dataset(np.array([[5.0, 3.0], [-1.0, 9.0], [1.0, 3.0]]), [0, 0, 0],
                               Stage.PCA)).features
    np.testing.assert_array_equal(out, [[1.0, 0.0], [0.0, 0.0], [0.5, 0.0]])


def _hand_pipeline(x_fit, x_apply, k):
    """Every stage written out with scalar loops and the 2x2 closed-form eigensystem."""
    m, d = len(x_fit), len(x_fit[0])
    means = [sum(r[j] for r in x_fit) / m for j in range(d)]
    stds = [math.sqrt(sum((r[j] - means[j]) ** 2 for r in x_fit) / m) for j in range(d)]

    def standardize(rows):
        return [[(r[j] - means[j]) / stds[j] for j in range(d)] for r in rows]

    z = standardize(x_fit)
    a = sum(r[0] * r[0] for r in z) / m
    b = sum(r[0] * r[1] for r in z) / m
    c = sum(r[1] * r[1] for r in z) / m
    half = math.sqrt(((a - c) / 2) ** 2 + b * b)
    vecs = []
    for lam in ((a + c) / 2 + half, (a + c) / 2 - half):
        v = [b, lam - a] if abs(b) > 1e-15 else ([1.0, 0.0] if lam == a else [0.0, 1.0])
        norm = math.hypot(*v)
        v = [v[0] / norm, v[1] / norm]
        if abs(v[1]) > abs(v[0]) and v[1] < 0 or abs(v[0]) >= abs(v[1]) and v[0] < 0:
            v = [-v[0], -v[1]]
        vecs.append(v)
    vecs = vecs[:k]

    def project(rows):
        return [[r[0] * v[0] + r[1] * v[1] for v in vecs] for r in rows]

    p = project(z)
    lo = [min(r[j] for r in p) for j in range(k)]
    hi = [max(r[j] for r in p) for j in range(k)]
    out = project(standardize(x_apply))
    return [[min(1.0, max(0.0, (r[j] - lo[j]) / (hi[j] - lo[j]))) for j in range(k)]
            for r in out]


def test_pipeline_matches_hand_chain():
    x = [[1.0, 2.0], [3.0, 1.0], [4.0, 6.0], [0.0, 3.0]]
    probe = [[2.0, 2.0], [9.0, -4.0], [1.0, 3.0]]
    train = raw(x)
    pipe = fit_pipeline(train, 2)
    np.testing.assert_allclose(pipe(train).features, _hand_pipeline(x, x, 2), atol=1e-9)
    np.testing.assert_allclose(pipe(raw(probe)).features, _hand_pipeline(x, probe, 2), atol=1e-9)
    one = fit_pipeline(train, 1)
    np.testing.assert_allclose(one(raw(probe)).features, _hand_pipeline(x, probe, 1), atol=1e-9)


def test_pipeline_fit_on_self_in_unit_box(rng):
    train = raw(rng.normal(size=(30, 6)))
    out = fit_pipeline(train, 4)(train)
    assert out.stage == Stage.MINMAX
    assert out.features.min() >= 0.0 and out.features.max() <= 1.0
    np.testing.assert_allclose(out.features.min(axis=0), 0.0)
    np.testing.assert_allclose(out.features.max(axis=0), 1.0)


def test_pipeline_clamps_test_values(rng):
    train = raw(rng.normal(size=(20, 3)))
    pipe = fit_pipeline(train, 3)
    far = raw(1e6 * np.ones((1, 3)))
    out = pipe(far).features
    assert set(np.unique(out)) <= {0.0, 1.0}


def test_pipeline_dimension_mismatch(rng):
    pipe = fit_pipeline(raw(rng.normal(size=(10, 3))), 2)
    with pytest.raises(InvalidInputError):
        pipe(raw(np.ones((2, 4))))
    with pytest.raises(InvalidInputError):
        apply_pipeline(raw(np.ones((2, 3))), pipe.scaler, pipe.pca.truncate(1), pipe.minmax)


def test_pipeline_deterministic(rng):
    x = rng.normal(size=(25, 8))
    a = fit_pipeline(raw(x), 5)(raw(x)).features
    b = fit_pipeline(raw(x.copy()), 5)(raw(x.copy())).features
    assert a.tobytes() == b.tobytes()


def test_truncated_pca_equals_direct_fit(rng):
    train = raw(rng.normal(size=(40, 6)) @ rng.normal(size=(6, 6)))
    full = fit_pipeline(train, 6)
    np.testing.assert_allclose(fit_pipeline(train, 3, full.pca)(train).features,
                               fit_pipeline(train, 3)(train).features, atol=1e-12)


def test_serialization_round_trip(tmp_path, rng):
    x = rng.normal(size=(12, 4))
    x[:, 2] = 1.0
    pipe = fit_pipeline(raw(x), 3)
    save_pipeline(tmp_path / "p.json", pipe)
    again = load_pipeline(tmp_path / "p.json")
    probe = raw(rng.normal(size=(5, 4)))
    assert pipe(probe).features.tobytes() == again(probe).features.tobytes()


def test_serialization_rejects_foreign_file(tmp_path):
    (tmp_path / "x.json").write_text('{"format": "other", "version": 1}')
    with pytest.raises(FormatError):
        load_pipeline(tmp_path / "x.json")

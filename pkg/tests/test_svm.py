import numpy as np
import pytest

from dualkernel.errors import FormatError, InvalidInputError
from dualkernel.kernels import KernelMatrix
from dualkernel.svm import (
    OvoEnsemble, SvmModel, decision, dual_objective, kkt_violation, load_ensemble, metrics,
    predict_ovo, predict_sign, save_ensemble, solve_dual, train_ovo,
)

from oracles import dual_face_oracle, dual_grid_oracle


def _instance(rng, m, d=3):
    X = rng.normal(size=(m, d))
    K = np.exp(-rng.uniform(0.1, 2.0) * ((X[:, None] - X[None]) ** 2).sum(-1))
    y = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    y[0], y[1] = 1.0, -1.0
    return K, y


def _assert_feasible(model):
    assert np.all(model.alphas >= 0) and np.all(model.alphas <= model.C)
    assert abs(model.alphas @ model.labels) < 1e-6 * model.C


def test_two_point_identity():
    K = np.eye(2)
    y = np.array([1.0, -1.0])
    model = solve_dual(K, y, 10.0)
    np.testing.assert_allclose(model.alphas, [1.0, 1.0], atol=1e-9)
    assert abs(model.bias) < 1e-12
    best, _ = dual_grid_oracle(K, y, 10.0)
    assert abs(dual_objective(model.alphas, K, y) - best) < 1e-3
    _assert_feasible(model)


def test_two_point_small_c_matches_grid(rng):
    X = np.array([[0.0], [3.0]])
    K = np.exp(-0.1 * (X - X.T) ** 2)
    y = np.array([1.0, -1.0])
    for C in (0.05, 0.5, 5.0):
        model = solve_dual(K, y, C)
        best, _ = dual_grid_oracle(K, y, C)
        assert abs(dual_objective(model.alphas, K, y) - best) < 1e-3
        assert kkt_violation(model, K) < 1e-3


def test_duplicates_with_opposite_labels():
    K = np.ones((2, 2))
    model = solve_dual(K, [1.0, -1.0], 3.0)
    np.testing.assert_allclose(model.alphas, [3.0, 3.0])
    assert model.converged


@pytest.mark.parametrize("C", [0.1, 1.0, 10.0])
def test_matches_exact_oracle(rng, C):
    for _ in range(8):
        m = int(rng.integers(2, 9))
        K, y = _instance(rng, m)
        model = solve_dual(K, y, C)
        best, _ = dual_face_oracle(K, y, C)
        got = dual_objective(model.alphas, K, y)
        assert got <= best + 1e-9
        assert best - got < 1e-3
        assert kkt_violation(model, K) < 1e-3
        _assert_feasible(model)


def test_interior_support_vectors_on_margin(rng):
    K, y = _instance(rng, 30)
    model = solve_dual(K, y, 1.0, tol=1e-6)
    eps = 1e-9
    free = np.flatnonzero((model.alphas > eps) & (model.alphas < model.C - eps))
    assert free.size
    for i in free:
        assert abs(y[i] * decision(model, K[i]) - 1.0) < 1e-4


def test_monotone_c_margin_violations():
    X = np.array([[0.0, 0.0], [0.4, 0.1], [1.0, 1.0], [0.9, 1.2], [0.5, 0.6], [0.55, 0.45]])
    y = np.array([1.0, 1.0, -1.0, -1.0, 1.0, -1.0])
    K = np.exp(-2.0 * ((X[:, None] - X[None]) ** 2).sum(-1))
    counts = []
    for C in (0.1, 1.0, 10.0, 100.0):
        model = solve_dual(K, y, C, tol=1e-6)
        counts.append(int(np.sum(y * decision(model, K) < 1.0 - 1e-6)))
    assert counts == sorted(counts, reverse=True), counts


def test_non_convergence_is_flagged(rng):
    K, y = _instance(rng, 20)
    model = solve_dual(K, y, 100.0, tol=1e-12, max_passes=0)
    assert not model.converged and model.n_iter == 0


def test_solve_dual_validation():
    with pytest.raises(InvalidInputError):
        solve_dual(np.eye(3), [1.0, -1.0], 1.0)
    with pytest.raises(InvalidInputError):
        solve_dual(np.eye(2), [1.0, 0.0], 1.0)
    with pytest.raises(InvalidInputError):
        solve_dual(np.eye(2), [1.0, -1.0], 0.0)


def test_kernel_meta_is_carried():
    K = KernelMatrix(np.eye(2), "classical", {"gamma": 0.5})
    assert solve_dual(K, [1.0, -1.0], 1.0).kernel_meta == {"gamma": 0.5}


def test_decision_examples():
    empty = SvmModel(np.zeros(3), 0.7, np.array([1.0, -1.0, 1.0]), 1.0)
    assert decision(empty, [0.3, 0.2, 0.1]) == pytest.approx(0.7)
    model = SvmModel(np.array([0.3, 0.8, 0.5]), -0.25, np.array([1.0, -1.0, 1.0]), 1.0)
    row = [0.9, 0.1, 0.4]
    expected = sum(a * yy * k for a, yy, k in zip(model.alphas, model.labels, row)) + model.bias
    assert abs(decision(model, row) - expected) < 1e-12
    np.testing.assert_allclose(decision(model, [row, row]), [expected, expected], atol=1e-12)
    with pytest.raises(InvalidInputError):
        decision(model, [0.1, 0.2])
    np.testing.assert_array_equal(predict_sign([-0.1, 0.0, 2.0]), [-1, 1, 1])


def _blobs(rng, k, per):
    centres = rng.normal(scale=4.0, size=(k, 2))
    X = np.concatenate([c + rng.normal(size=(per, 2)) for c in centres])
    labels = np.repeat(np.arange(k), per)
    K = np.exp(-0.5 * ((X[:, None] - X[None]) ** 2).sum(-1))
    return K, labels


def test_ovo_counts_and_indices(rng):
    for k, expected in ((3, 3), (10, 45)):
        K, labels = _blobs(rng, k, 4)
        e = train_ovo(K, labels, 1.0)
        assert len(e) == expected
        for (p, q), idx in e.indices.items():
            assert p < q
            assert np.all(np.diff(idx) > 0)
            assert set(labels[idx]) == {p, q}
            np.testing.assert_array_equal(e.models[(p, q)].labels, np.where(labels[idx] == p, 1, -1))
            _assert_feasible(e.models[(p, q)])


def test_ovo_two_classes_reduce_to_sign(rng):
    K, labels = _blobs(rng, 2, 10)
    e = train_ovo(K, labels, 1.0)
    f = decision(e.models[(0, 1)], K)
    np.testing.assert_array_equal(predict_ovo(e, K), np.where(f >= 0, 0, 1))


def test_ovo_worker_determinism(rng):
    K, labels = _blobs(rng, 4, 8)
    a = train_ovo(K, labels, 1.0, workers=1)
    b = train_ovo(K, labels, 1.0, workers=4)
    np.testing.assert_array_equal(predict_ovo(a, K), predict_ovo(b, K))
    for pq in a.models:
        np.testing.assert_array_equal(a.models[pq].alphas, b.models[pq].alphas)


def _fixed(f):
    return SvmModel(np.zeros(1), f, np.array([1.0]), 1.0)


def test_ovo_hand_built_tie():
    # (0,1) votes 0 with |f|=0.5, (0,2) votes 2 with 0.2, (1,2) votes 1 with 0.9
    models = {(0, 1): _fixed(0.5), (0, 2): _fixed(-0.2), (1, 2): _fixed(0.9)}
    e = OvoEnsemble((0, 1, 2), models, {pq: np.array([0]) for pq in models})
    rows = {pq: np.zeros((1, 1)) for pq in models}
    assert predict_ovo(e, rows).tolist() == [1]
    # equal strengths fall back to the lowest class
    models = {(0, 1): _fixed(0.5), (0, 2): _fixed(-0.5), (1, 2): _fixed(0.5)}
    e = OvoEnsemble((0, 1, 2), models, {pq: np.array([0]) for pq in models})
    assert predict_ovo(e, rows).tolist() == [0]
    with pytest.raises(InvalidInputError):
        predict_ovo(e, {(0, 1): np.zeros((1, 1))})


def test_ovo_unanimous():
    models = {(p, q): _fixed(1.0 if p == 3 else -1.0) for p in range(5) for q in range(p + 1, 5)}
    e = OvoEnsemble(tuple(range(5)), models, {pq: np.array([0]) for pq in models})
    assert predict_ovo(e, {pq: np.zeros((1, 1)) for pq in models}).tolist() == [3]


def test_metrics_perfect_and_symmetric():
    r = metrics([0, 1, 2, 1], [0, 1, 2, 1], 3)
    assert r.accuracy == r.f1_macro == r.recall_macro == r.specificity_macro == 1.0
    np.testing.assert_array_equal(r.confusion, np.diag([1, 2, 1]))
    r = metrics([0, 0, 1, 1], [0, 1, 0, 1], 2)
    assert r.accuracy == 0.5 and r.recall_macro == 0.5
    np.testing.assert_array_equal(r.confusion, [[1, 1], [1, 1]])


def test_metrics_hand_computed():
    y_true = [0, 0, 0, 1, 1, 2, 2, 2, 2]
    y_pred = [0, 0, 1, 1, 2, 2, 2, 0, 2]
    r = metrics(y_true, y_pred, 3)
    np.testing.assert_array_equal(r.confusion, [[2, 1, 0], [0, 1, 1], [1, 0, 3]])
    assert abs(r.accuracy - 6 / 9) < 1e-12
    recall = [2 / 3, 1 / 2, 3 / 4]
    precision = [2 / 3, 1 / 2, 3 / 4]
    f1 = [2 * p * q / (p + q) for p, q in zip(precision, recall)]
    assert abs(r.recall_macro - sum(recall) / 3) < 1e-12
    assert abs(r.f1_macro - sum(f1) / 3) < 1e-12
    assert abs(r.specificity_macro - (5 / 6 + 6 / 7 + 4 / 5) / 3) < 1e-12
    assert r.confusion.sum(axis=1).tolist() == [3, 2, 4]
    assert abs(r.accuracy - np.trace(r.confusion) / r.confusion.sum()) < 1e-15


def test_metrics_absent_class_excluded():
    r = metrics([0, 0, 1], [0, 2, 1], 3)
    assert r.recall_macro == pytest.approx((0.5 + 1.0) / 2)
    with pytest.raises(InvalidInputError):
        metrics([0, 1], [0], 2)
    with pytest.raises(InvalidInputError):
        metrics([], [], 2)


def test_ensemble_round_trip(tmp_path, rng):
    K, labels = _blobs(rng, 3, 5)
    e = train_ovo(K, labels, 1.0)
    path = tmp_path / "model.json"
    save_ensemble(path, e)
    back = load_ensemble(path)
    assert back.classes == e.classes
    for pq in e.models:
        np.testing.assert_array_equal(back.models[pq].alphas, e.models[pq].alphas)
        assert back.models[pq].bias == e.models[pq].bias
        np.testing.assert_array_equal(back.indices[pq], e.indices[pq])
    np.testing.assert_array_equal(predict_ovo(back, K), predict_ovo(e, K))
    path.write_text('{"format": "other", "version": 1}')
    with pytest.raises(FormatError):
        load_ensemble(path)

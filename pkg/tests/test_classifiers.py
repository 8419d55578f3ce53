import numpy as np
import pytest

from bandvote.classify import KnnClassifier, LinearSvm, evaluate, make_classifier
from bandvote.errors import DegenerateDataError, ParameterError, ShapeError


def brute_force_knn(train_x, train_y, query, k):
    d = np.sqrt(((train_x - query) ** 2).sum(axis=1))
    order = np.argsort(d, kind="stable")[:k]
    labels, dists = train_y[order], d[order]
    best = None
    for cls in sorted(set(labels)):
        mask = labels == cls
        key = (-mask.sum(), dists[mask].sum(), cls)
        if best is None or key < best[0]:
            best = (key, cls)
    return best[1]


def exact_dual_svm(x, y, c):
    """Reference soft-margin dual via cvxopt; returns the primal weight vector."""
    from cvxopt import matrix, solvers

    k = x.shape[0]
    q_mat = (y[:, None] * y[None, :]) * (x @ x.T)
    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-12
    solvers.options["reltol"] = 1e-12
    sol = solvers.qp(
        matrix(q_mat), matrix(-np.ones(k)),
        matrix(np.vstack([-np.eye(k), np.eye(k)])),
        matrix(np.concatenate([np.zeros(k), np.full(k, c)])),
        matrix(y[None, :]), matrix(np.zeros(1)),
    )
    alpha = np.asarray(sol["x"]).ravel()
    return x.T @ (alpha * y)


def test_knn_basic_examples():
    model = KnnClassifier(k=1, standardize=False).fit(np.array([[0.0], [10.0]]), np.array([0.0, 1.0]))
    assert model.predict([[1.0]])[0] == 0.0
    x = np.array([[0.0], [0.2], [5.0]])
    y = np.array([0.0, 0.0, 1.0])
    model = KnnClassifier(k=3, standardize=False).fit(x, y)
    assert model.predict([[0.1]])[0] == 0.0  # majority A,A,B -> A


def test_knn_matches_brute_force():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 3))
    y = rng.integers(0, 3, size=40).astype(float)
    model = KnnClassifier(k=5, standardize=False).fit(x, y)
    queries = rng.normal(size=(200, 3))
    preds = model.predict(queries)
    for q, p in zip(queries, preds):
        assert p == brute_force_knn(x, y, q, 5)


def test_knn_feature_permutation_invariance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 4))
    y = rng.integers(0, 2, size=30).astype(float)
    q = rng.normal(size=(10, 4))
    perm = [3, 1, 0, 2]
    a = KnnClassifier(k=3).fit(x, y).predict(q)
    b = KnnClassifier(k=3).fit(x[:, perm], y).predict(q[:, perm])
    assert np.array_equal(a, b)


def test_knn_parameter_errors():
    with pytest.raises(ParameterError):
        KnnClassifier(k=0)
    with pytest.raises(ParameterError):
        KnnClassifier(k=5).fit(np.zeros((2, 1)), np.array([0.0, 1.0]))


def test_svm_two_point_boundary():
    x = np.array([[-1.0], [1.0]])
    y = np.array([-1.0, 1.0])
    model = LinearSvm(c=1.0, standardize=False).fit(x, y)
    assert abs(model.bias) < 1e-8  # symmetric points: boundary at 0
    assert np.array_equal(model.predict(x), y)


def test_svm_xor_not_separable():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = LinearSvm(c=1.0, standardize=False).fit(x, y)
    acc = (model.predict(x) == y).mean()
    assert 0.5 <= acc <= 0.75


def test_svm_margin_matches_exact_dual():
    rng = np.random.default_rng(2)
    for trial in range(5):
        x = np.vstack([
            rng.normal(loc=(-2.0, 0.0), scale=0.5, size=(10, 2)),
            rng.normal(loc=(2.0, 0.0), scale=0.5, size=(10, 2)),
        ])
        y = np.array([-1.0] * 10 + [1.0] * 10)
        model = LinearSvm(c=1.0, tol=1e-10, standardize=False).fit(x, y)
        w_ref = exact_dual_svm(x, y, 1.0)
        margin_ref = 2.0 / np.linalg.norm(w_ref)
        assert model.margin == pytest.approx(margin_ref, abs=1e-4)


def test_svm_single_class_raises():
    with pytest.raises(DegenerateDataError):
        LinearSvm().fit(np.zeros((4, 2)), np.ones(4))


def test_svm_scale_invariance_of_labels():
    rng = np.random.default_rng(3)
    x = np.vstack([rng.normal(-1, 0.3, (15, 3)), rng.normal(1, 0.3, (15, 3))])
    y = np.repeat([-1.0, 1.0], 15)
    q = rng.normal(size=(20, 3))
    scale = 7.0
    base = LinearSvm(c=1.0, standardize=False).fit(x, y).predict(q)
    scaled = LinearSvm(c=1.0 / scale**2, standardize=False).fit(scale * x, y).predict(scale * q)
    assert np.array_equal(base, scaled)


def test_svm_multiclass_one_vs_one():
    rng = np.random.default_rng(4)
    centers = [(-4.0, 0.0), (0.0, 4.0), (4.0, 0.0)]
    x = np.vstack([rng.normal(c, 0.4, size=(12, 2)) for c in centers])
    y = np.repeat([0.0, 1.0, 2.0], 12)
    model = LinearSvm(c=1.0).fit(x, y)
    assert (model.predict(x) == y).mean() > 0.95


def test_make_classifier():
    assert isinstance(make_classifier("knn"), KnnClassifier)
    assert isinstance(make_classifier({"kind": "svm", "c": 2.0}), LinearSvm)
    with pytest.raises(ParameterError):
        make_classifier("forest")


def test_evaluate_perfect():
    metrics, cm = evaluate([1, -1, 1], [1, -1, 1], positive_class=1, negative_class=-1)
    assert metrics.accuracy == 100.0
    assert metrics.sensitivity == 100.0
    assert metrics.specificity == 100.0
    assert np.trace(cm.counts) == 3


def test_evaluate_direct_formulas():
    # TP=9, FN=1, TN=8, FP=2
    act = [1] * 10 + [-1] * 10
    pred = [1] * 9 + [-1] + [1] * 2 + [-1] * 8
    metrics, _ = evaluate(pred, act, positive_class=1, negative_class=-1)
    assert metrics.sensitivity == pytest.approx(90.0)
    assert metrics.specificity == pytest.approx(80.0)
    assert metrics.accuracy == pytest.approx(85.0)


def test_evaluate_reported_two_class_row_format():
    # fixture mirroring a reported (accuracy, sensitivity, specificity) row:
    # 200 test samples, positive sensitivity 98.5%, negative specificity 96.5%
    act = [1] * 200 + [-1] * 200
    pred = [1] * 197 + [-1] * 3 + [1] * 7 + [-1] * 193
    metrics, _ = evaluate(pred, act, positive_class=1, negative_class=-1)
    assert metrics.accuracy == pytest.approx(97.5)
    assert metrics.sensitivity == pytest.approx(98.5)
    assert metrics.specificity == pytest.approx(96.5)


def test_confusion_matrix_sums_and_percentages():
    act = [0, 0, 1, 1, 2, 2]
    pred = [0, 1, 1, 1, 2, 0]
    metrics, cm = evaluate(pred, act, class_order=[0, 1, 2])
    assert cm.counts.sum(axis=0).tolist() == [2, 2, 2]
    assert cm.total == 6
    assert metrics.accuracy == pytest.approx(100.0 * np.trace(cm.counts) / 6)
    col_pct = cm.column_percentages()
    assert np.allclose(col_pct.sum(axis=0), 100.0)


def test_evaluate_length_mismatch():
    with pytest.raises(ShapeError):
        evaluate([1, 2], [1])

"""Base learners and evaluation metrics.

KNN and a linear soft-margin SVM trained by most-violating-pair SMO; both
standardize features with training-fold statistics by default, and both
break every tie deterministically (lowest class code last). Multiclass SVM
is one-vs-one with majority vote.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConvergenceError, DegenerateDataError, ParameterError, ShapeError


def _check_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim != 2:
        raise ShapeError(f"feature matrix must be 2-D, got {x.shape}")
    if x.shape[0] != y.size:
        raise ShapeError(f"{x.shape[0]} samples but {y.size} labels")
    if not np.all(np.isfinite(x)):
        raise ValueError("features contain non-finite values")
    return x, y


class _Standardizer:
    def fit(self, x):
        self.mean = x.mean(axis=0)
        std = x.std(axis=0, ddof=0)
        self.std = np.where(std > 0.0, std, 1.0)
        return self

    def transform(self, x):
        return (x - self.mean) / self.std


class KnnClassifier:
    """k-nearest-neighbour majority vote with deterministic tie-breaking.

    Ties on vote count go to the class with the smallest summed neighbour
    distance, then to the lowest class code.
    """

    def __init__(self, k: int = 5, standardize: bool = True):
        if k < 1:
            raise ParameterError("k must be >= 1")
        self.k = k
        self.standardize = standardize

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        if x.shape[0] == 0:
            raise DegenerateDataError("empty training set")
        if self.k > x.shape[0]:
            raise ParameterError(f"k={self.k} exceeds training size {x.shape[0]}")
        self._scaler = _Standardizer().fit(x) if self.standardize else None
        self._x = self._scaler.transform(x) if self._scaler else x
        self._y = y
        return self

    def predict(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self._scaler:
            x = self._scaler.transform(x)
        out = np.empty(x.shape[0])
        for i, q in enumerate(x):
            d = np.sqrt(((self._x - q) ** 2).sum(axis=1))
            order = np.argsort(d, kind="stable")[: self.k]
            labels = self._y[order]
            dists = d[order]
            best = None
            for cls in np.unique(labels):
                mask = labels == cls
                key = (-int(mask.sum()), float(dists[mask].sum()), float(cls))
                if best is None or key < best[0]:
                    best = (key, cls)
            out[i] = best[1]
        return out


class LinearSvm:
    """Linear soft-margin SVM trained in the dual by SMO.

    Pair selection is the most-violating-pair rule; the stopping criterion
    is the KKT gap falling below ``tol``. Multiclass input is handled
    one-vs-one with majority voting.
    """

    def __init__(self, c: float = 1.0, tol: float = 1e-6, max_iter: int | None = None,
                 standardize: bool = True):
        if c <= 0:
            raise ParameterError("C must be positive")
        self.c = c
        self.tol = tol
        self.max_iter = max_iter
        self.standardize = standardize

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        classes = np.unique(y)
        if classes.size < 2:
            raise DegenerateDataError("training data contains a single class")
        self.classes_ = classes
        self._scaler = _Standardizer().fit(x) if self.standardize else None
        xs = self._scaler.transform(x) if self._scaler else x
        self._models = {}
        for lo, hi in combinations(classes, 2):
            mask = (y == lo) | (y == hi)
            self._models[(lo, hi)] = _fit_binary(
                xs[mask], np.where(y[mask] == hi, 1.0, -1.0), self.c, self.tol, self.max_iter
            )
        return self

    @property
    def weights(self) -> np.ndarray:
        """Primal weight vector (binary problems only)."""
        if len(self._models) != 1:
            raise ValueError("weights are defined for the binary case only")
        return next(iter(self._models.values()))[0]

    @property
    def bias(self) -> float:
        if len(self._models) != 1:
            raise ValueError("bias is defined for the binary case only")
        return next(iter(self._models.values()))[1]

    @property
    def margin(self) -> float:
        w = self.weights
        return 2.0 / float(np.linalg.norm(w))

    def decision_function(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self._scaler:
            x = self._scaler.transform(x)
        (w, b) = next(iter(self._models.values()))
        return x @ w + b

    def predict(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self._scaler:
            x = self._scaler.transform(x)
        votes = np.zeros((x.shape[0], self.classes_.size))
        index = {c: i for i, c in enumerate(self.classes_)}
        for (lo, hi), (w, b) in self._models.items():
            score = x @ w + b
            votes[score > 0.0, index[hi]] += 1
            votes[score <= 0.0, index[lo]] += 1
        # majority vote; ties resolved toward the lowest class code
        return self.classes_[votes.argmax(axis=1)]


def _fit_binary(x, y, c, tol, max_iter):
    """SMO on the dual; returns the primal (w, b) for the linear kernel."""
    k = x.shape[0]
    gram = x @ x.T
    alpha = np.zeros(k)
    v = np.zeros(k)  # K @ (alpha * y)
    cap = max_iter if max_iter is not None else max(200_000, 2_000 * k)
    eps = 1e-12
    best_gap = np.inf
    stall = 0
    stall_limit = max(1000, 10 * k)

    for _ in range(cap):
        neg_e = y - v  # -E_i with the bias term cancelled
        up = ((alpha < c - eps) & (y > 0)) | ((alpha > eps) & (y < 0))
        low = ((alpha < c - eps) & (y < 0)) | ((alpha > eps) & (y > 0))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(neg_e[up])])
        j = int(np.flatnonzero(low)[np.argmin(neg_e[low])])
        gap = neg_e[i] - neg_e[j]
        if gap <= tol:
            break
        if gap < best_gap - 1e-12:
            best_gap = gap
            stall = 0
        else:
            # The dual ascent is monotone; a gap that stops shrinking means the
            # iterate sits at the numerical floor and is safe to accept.
            stall += 1
            if stall >= stall_limit:
                break
        if y[i] != y[j]:
            lo_bound = max(0.0, alpha[j] - alpha[i])
            hi_bound = min(c, c + alpha[j] - alpha[i])
        else:
            lo_bound = max(0.0, alpha[i] + alpha[j] - c)
            hi_bound = min(c, alpha[i] + alpha[j])
        if hi_bound - lo_bound < eps:
            break
        eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
        e_i, e_j = v[i] - y[i], v[j] - y[j]
        if eta > eps:
            aj_new = np.clip(alpha[j] + y[j] * (e_i - e_j) / eta, lo_bound, hi_bound)
        else:
            slope = y[j] * (e_i - e_j)  # dual objective is linear in alpha_j here
            aj_new = hi_bound if slope > 0 else lo_bound
        d_j = aj_new - alpha[j]
        if abs(d_j) < eps:
            break
        d_i = -y[i] * y[j] * d_j
        alpha[i] += d_i
        alpha[j] = aj_new
        v += (d_i * y[i]) * gram[:, i] + (d_j * y[j]) * gram[:, j]
    else:
        if best_gap > max(tol, 1e-3):
            raise ConvergenceError(
                f"SMO did not converge within {cap} iterations (KKT gap {best_gap:.3e})"
            )

    neg_e = y - v
    up = ((alpha < c - eps) & (y > 0)) | ((alpha > eps) & (y < 0))
    low = ((alpha < c - eps) & (y < 0)) | ((alpha > eps) & (y > 0))
    hi = neg_e[up].max() if up.any() else 0.0
    lo = neg_e[low].min() if low.any() else 0.0
    b = 0.5 * (hi + lo)
    w = x.T @ (alpha * y)
    return w, float(b)


def make_classifier(spec: dict | str):
    """Build a classifier from a spec like {"kind": "svm", "c": 1.0}."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "knn":
        return KnnClassifier(k=spec.get("k", 5))
    if kind == "svm":
        return LinearSvm(c=spec.get("c", 1.0), tol=spec.get("tol", 1e-6))
    raise ParameterError(f"unknown classifier kind {kind!r}")


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed (predicted label row, actual label column)."""

    classes: tuple[float, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy_pct(self) -> float:
        return 100.0 * float(np.trace(self.counts)) / self.total

    def column_percentages(self) -> np.ndarray:
        col = self.counts.sum(axis=0)
        safe = np.where(col > 0, col, 1)
        return 100.0 * self.counts / safe


@dataclass(frozen=True)
class RunMetrics:
    accuracy: float
    sensitivity: float | None = None
    specificity: float | None = None


def evaluate(predictions, actuals, positive_class=None, negative_class=None,
             class_order=None) -> tuple[RunMetrics, ConfusionMatrix]:
    """Accuracy plus, for two-class runs, sensitivity/specificity."""
    pred = np.asarray(predictions, dtype=float).ravel()
    act = np.asarray(actuals, dtype=float).ravel()
    if pred.size != act.size:
        raise ShapeError(f"{pred.size} predictions but {act.size} actuals")
    classes = tuple(class_order) if class_order is not None else tuple(np.unique(np.concatenate([act, pred])))
    idx = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=int)
    for p, a in zip(pred, act):
        counts[idx[p], idx[a]] += 1
    cm = ConfusionMatrix(classes, counts)
    sens = spec = None
    if positive_class is not None:
        pos = float(positive_class)
        neg = float(negative_class) if negative_class is not None else None
        is_pos_actual = act == pos
        is_neg_actual = ~is_pos_actual if neg is None else act == neg
        tp = int(((pred == pos) & is_pos_actual).sum())
        fn = int(((pred != pos) & is_pos_actual).sum())
        tn = int(((pred != pos) & is_neg_actual).sum())
        fp = int(((pred == pos) & is_neg_actual).sum())
        sens = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        spec = 100.0 * tn / (tn + fp) if tn + fp else 0.0
    return RunMetrics(cm.accuracy_pct(), sens, spec), cm

"""Weight voting over feature subsets.

Features are partitioned into m contiguous subsets, one weak classifier is
trained per subset on the complement of that subset, and vote weights are
fitted so the weighted label sum best matches the true labels. Each fitted
complement weight is then spread equally over the m-1 subsets it covers,
giving a per-band importance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .classify import make_classifier
from .errors import DegenerateDataError, ParameterError, ShapeError
from .linalg import as_matrix, as_vector
from .qp import qp_from_least_squares, solve_simplex_qp, solve_unconstrained


@dataclass(frozen=True)
class FeaturePartition:
    """Contiguous index ranges covering all features; larger subsets first."""

    m: int
    ranges: tuple[tuple[int, int], ...]
    band_ranges_hz: tuple[tuple[float, float], ...] | None = None

    @property
    def n_features(self) -> int:
        return self.ranges[-1][1]

    def subset_indices(self, i: int) -> np.ndarray:
        lo, hi = self.ranges[i]
        return np.arange(lo, hi)

    def complement_indices(self, i: int) -> np.ndarray:
        lo, hi = self.ranges[i]
        return np.concatenate([np.arange(0, lo), np.arange(hi, self.n_features)])


@dataclass(frozen=True)
class WeightVector:
    """Fitted complement weights w and redistributed per-band weights W."""

    method: str
    w: np.ndarray
    redistributed: np.ndarray
    residual: float
    band_ranges_hz: tuple[tuple[float, float], ...] | None = None
    fallback: bool = False

    @property
    def m(self) -> int:
        return self.w.size

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "m": self.m,
            "band_ranges_hz": self.band_ranges_hz,
            "w": self.w.tolist(),
            "W": self.redistributed.tolist(),
            "residual": self.residual,
            "fallback": self.fallback,
        }


def write_weights_json(weights: WeightVector, path) -> None:
    with open(path, "w") as fh:
        json.dump(weights.to_json_dict(), fh, indent=2)
        fh.write("\n")


def read_weights_json(path) -> WeightVector:
    with open(path) as fh:
        doc = json.load(fh)
    bands = doc.get("band_ranges_hz")
    return WeightVector(
        method=doc["method"],
        w=np.asarray(doc["w"], dtype=float),
        redistributed=np.asarray(doc["W"], dtype=float),
        residual=float(doc["residual"]),
        band_ranges_hz=tuple(tuple(b) for b in bands) if bands else None,
        fallback=bool(doc.get("fallback", False)),
    )


def partition_features(n_features: int, m: int,
                       band_ranges_hz=None) -> FeaturePartition:
    """Split 0..n_features into m contiguous subsets, sizes differing by at most 1."""
    if m < 2:
        raise ParameterError("m must be >= 2")
    if m > n_features:
        raise ParameterError(f"m={m} exceeds feature count {n_features}")
    base, extra = divmod(n_features, m)
    sizes = [base + 1] * extra + [base] * (m - extra)
    ranges, start = [], 0
    for s in sizes:
        ranges.append((start, start + s))
        start += s
    if band_ranges_hz is not None:
        band_ranges_hz = tuple(tuple(b) for b in band_ranges_hz)
    return FeaturePartition(m=m, ranges=tuple(ranges), band_ranges_hz=band_ranges_hz)


def equal_band_ranges(freq_start: float, freq_end: float, m: int) -> tuple[tuple[float, float], ...]:
    """Nominal Hz label per subset: the band split into m equal parts."""
    width = (freq_end - freq_start) / m
    return tuple((freq_start + i * width, freq_start + (i + 1) * width) for i in range(m))


def train_weak_classifiers(x, y, partition: FeaturePartition, base_spec) -> list:
    """One classifier per subset, trained on the complement features."""
    x, y = as_matrix(x, "features"), as_vector(y, "labels")
    if x.shape[1] != partition.n_features:
        raise ShapeError(f"{x.shape[1]} features but partition covers {partition.n_features}")
    if np.unique(y).size < 2:
        raise DegenerateDataError("weak classifiers need at least 2 classes in training data")
    models = []
    for i in range(partition.m):
        cols = partition.complement_indices(i)
        models.append(make_classifier(base_spec).fit(x[:, cols], y))
    return models


def build_label_matrix(classifiers: list, x, partition: FeaturePartition) -> np.ndarray:
    """Entry (j, i) = classifier i's predicted code on sample j's complement features."""
    x = as_matrix(x, "features")
    if x.shape[1] != partition.n_features:
        raise ShapeError(f"{x.shape[1]} features but partition covers {partition.n_features}")
    if len(classifiers) != partition.m:
        raise ShapeError(f"{len(classifiers)} classifiers but partition has m={partition.m}")
    cols = [clf.predict(x[:, partition.complement_indices(i)]) for i, clf in enumerate(classifiers)]
    return np.column_stack(cols)


def redistribute(w) -> np.ndarray:
    """W_i = (sum of the other weights) / (m - 1)."""
    w = as_vector(w, "w")
    if w.size < 2:
        raise ParameterError("redistribution needs m >= 2")
    return (w.sum() - w) / (w.size - 1)


def vote_scores(l_matrix, w) -> np.ndarray:
    """Weighted label sums S = L w."""
    l_mat = as_matrix(l_matrix, "L")
    w = as_vector(w, "w")
    if l_mat.shape[1] != w.size:
        raise ShapeError(f"L has {l_mat.shape[1]} columns but w has length {w.size}")
    return l_mat @ w


def fit_weights(l_matrix, l_star, method: str,
                band_ranges_hz=None) -> WeightVector:
    """Fit vote weights by the requested method and redistribute them per band.

    ``constrained`` solves the simplex QP by active set; ``unconstrained``
    solves the normal equations and propagates a singularity error when the
    label matrix columns are collinear.
    """
    l_mat = as_matrix(l_matrix, "L")
    target = as_vector(l_star, "l_star")
    if method == "constrained":
        sol = solve_simplex_qp(qp_from_least_squares(l_mat, target))
        w = sol.w
    elif method == "unconstrained":
        try:
            w = solve_unconstrained(l_mat, target)
        except Exception as exc:
            raise type(exc)(f"unconstrained fit failed: {exc}") from exc
    else:
        raise ParameterError(f"unknown method {method!r}")
    residual = float(np.linalg.norm(l_mat @ w - target))
    if band_ranges_hz is not None:
        band_ranges_hz = tuple(tuple(b) for b in band_ranges_hz)
    return WeightVector(method=method, w=w, redistributed=redistribute(w),
                        residual=residual, band_ranges_hz=band_ranges_hz)

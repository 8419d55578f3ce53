"""Covariance-eigenvalue entropy features, one per spectral block.

Each block is standardized row-wise (mean 0, sample variance 1 with the
n-1 divisor), turned into the covariance (1/n) X X', and summarized by the
entropy of its eigenvalue spectrum: sum of -lambda*log(lambda) in nats,
with 0*log(0) taken as 0. Zero-variance rows are zeroed and flagged rather
than rejected so a clipped channel cannot abort a whole extraction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, NotPsdError, ShapeError
from .linalg import as_matrix, sym_eig
from .signal_prep import SpectralBlock

PSD_EIG_TOL = 1e-10


@dataclass(frozen=True)
class StandardizedBlock:
    data: np.ndarray
    row_means: np.ndarray
    row_stds: np.ndarray
    zero_variance_rows: tuple[int, ...] = ()


@dataclass(frozen=True)
class FeatureVector:
    """One entropy value per block, ordered by ascending block index."""

    values: np.ndarray
    block_ranges: tuple[tuple[float, float], ...] | None = None
    zero_variance_blocks: tuple[int, ...] = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ShapeError("feature values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("feature values must be finite")
        if self.block_ranges is not None and len(self.block_ranges) != vals.size:
            raise ShapeError("block_ranges length does not match feature count")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


def standardize(block) -> StandardizedBlock:
    """Row-wise zero mean, unit sample variance (n-1 divisor)."""
    data = block.data if isinstance(block, SpectralBlock) else as_matrix(block, "block")
    n = data.shape[1]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 columns to standardize, got {n}")
    means = data.mean(axis=1)
    stds = data.std(axis=1, ddof=1)
    centered = data - means[:, None]
    zero_rows = np.flatnonzero(stds <= 0.0)
    safe = np.where(stds > 0.0, stds, 1.0)
    out = centered / safe[:, None]
    out[zero_rows] = 0.0
    return StandardizedBlock(out, means, stds, tuple(int(i) for i in zero_rows))


def sample_covariance(std_block: StandardizedBlock | np.ndarray) -> np.ndarray:
    """M = (1/n) X X' for a p x n block (divisor n, matching the estimator used)."""
    x = std_block.data if isinstance(std_block, StandardizedBlock) else as_matrix(std_block, "X")
    n = x.shape[1]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 columns, got {n}")
    m = (x @ x.T) / n
    return 0.5 * (m + m.T)


def entropy_of_eigenvalues(eigenvalues: np.ndarray) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    lam = np.where((lam < 0.0) & (lam >= -PSD_EIG_TOL), 0.0, lam)
    positive = lam[lam > 0.0]
    return float(-(positive * np.log(positive)).sum())


def les_entropy(m) -> float:
    """Eigenvalue entropy of a symmetric PSD matrix, in nats."""
    spec = sym_eig(m)
    scale = max(float(np.abs(spec.eigenvalues).max()), 1e-300)
    if spec.eigenvalues.min() < -PSD_EIG_TOL * scale:
        raise NotPsdError(f"eigenvalue {spec.eigenvalues.min():g} below -{PSD_EIG_TOL:g} * norm")
    return entropy_of_eigenvalues(spec.eigenvalues)


def extract_features(blocks: list[SpectralBlock]) -> FeatureVector:
    """One entropy feature per block, preserving block order."""
    if not blocks:
        raise ShapeError("block list is empty")
    channels = blocks[0].data.shape[0]
    values = np.empty(len(blocks))
    ranges = []
    flagged = []
    for i, block in enumerate(blocks):
        if block.data.shape[0] != channels:
            raise ShapeError(f"block {i}: channel count {block.data.shape[0]} != {channels}")
        try:
            std = standardize(block)
            values[i] = les_entropy(sample_covariance(std))
        except Exception as exc:
            raise type(exc)(f"block {i}: {exc}") from exc
        if std.zero_variance_rows:
            flagged.append(i)
        ranges.append(block.freq_range)
    return FeatureVector(values, tuple(ranges), tuple(flagged))


# ---------------------------------------------------------------------------
# Feature files and the dataset manifest


def write_features_csv(features: FeatureVector, path) -> None:
    ranges = features.block_ranges or tuple((float("nan"), float("nan")) for _ in features.values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block_index", "freq_lo", "freq_hi", "les_value"])
        for i, (value, (lo, hi)) in enumerate(zip(features.values, ranges)):
            writer.writerow([i, repr(float(lo)), repr(float(hi)), repr(float(value))])


def read_features_csv(path) -> FeatureVector:
    values, ranges = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            values.append(float(row[3]))
            ranges.append((float(row[1]), float(row[2])))
    return FeatureVector(np.array(values), tuple(ranges))


def write_feature_manifest(entries: list[dict], path, extra: dict | None = None) -> None:
    """entries: [{"features": str, "class_label": str}, ...] relative to the manifest."""
    doc = {"entries": entries}
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_feature_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)

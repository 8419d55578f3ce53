"""Weight discretization and proportional feature replication.

Per-band weights are binned uniformly between their own min and max into
integer levels; each band's features are then repeated level-many times.
Bins are left-closed/right-open with the top bin right-closed, and a
degenerate weight range (all equal) maps every band to level 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .linalg import as_vector
from .voting import FeaturePartition

DEFAULT_NUM_LEVELS = 5


@dataclass(frozen=True)
class WeightLevels:
    levels: np.ndarray
    num_levels: int
    bin_edges: np.ndarray

    def to_json_dict(self, band_ranges_hz=None) -> dict:
        return {
            "num_levels": self.num_levels,
            "bin_edges": self.bin_edges.tolist(),
            "levels": self.levels.tolist(),
            "band_ranges_hz": band_ranges_hz,
        }


@dataclass(frozen=True)
class AugmentedFeatureVector:
    values: np.ndarray
    provenance: tuple[tuple[int, int, int], ...]  # (band, original index, copy number)


def discretize(weights, num_levels: int = DEFAULT_NUM_LEVELS) -> WeightLevels:
    """Map weights onto 1..num_levels by uniform binning of [min, max]."""
    w = as_vector(weights, "weights")
    if num_levels < 1:
        raise ParameterError("num_levels must be >= 1")
    lo, hi = float(w.min()), float(w.max())
    edges = np.linspace(lo, hi, num_levels + 1)
    if hi <= lo:
        return WeightLevels(np.ones(w.size, dtype=int), num_levels, edges)
    idx = np.floor((w - lo) / (hi - lo) * num_levels).astype(int)
    levels = np.clip(idx, 0, num_levels - 1) + 1
    return WeightLevels(levels, num_levels, edges)


def augment_indices(partition: FeaturePartition, levels: WeightLevels):
    """Column index vector realizing the replication, plus provenance per output column."""
    if levels.levels.size != partition.m:
        raise ShapeError(f"{levels.levels.size} levels but partition has m={partition.m}")
    cols, provenance = [], []
    for band in range(partition.m):
        reps = int(levels.levels[band])
        for orig in partition.subset_indices(band):
            for copy in range(reps):
                cols.append(int(orig))
                provenance.append((band, int(orig), copy))
    return np.asarray(cols, dtype=int), tuple(provenance)


def augment(values, partition: FeaturePartition, levels: WeightLevels) -> AugmentedFeatureVector:
    """Replicate each band's features level-many times, order preserved."""
    vals = as_vector(values, "features")
    if vals.size != partition.n_features:
        raise ShapeError(f"{vals.size} features but partition covers {partition.n_features}")
    cols, provenance = augment_indices(partition, levels)
    return AugmentedFeatureVector(vals[cols], provenance)


def write_augmentation_json(levels: WeightLevels, path, band_ranges_hz=None) -> None:
    with open(path, "w") as fh:
        json.dump(levels.to_json_dict(band_ranges_hz), fh, indent=2)
        fh.write("\n")


def read_augmentation_json(path) -> WeightLevels:
    with open(path) as fh:
        doc = json.load(fh)
    return WeightLevels(
        levels=np.asarray(doc["levels"], dtype=int),
        num_levels=int(doc["num_levels"]),
        bin_edges=np.asarray(doc["bin_edges"], dtype=float),
    )

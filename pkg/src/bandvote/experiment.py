"""End-to-end experiments: data, features, weights, classification, reports.

An experiment draws a labelled corpus of multichannel recordings (synthetic
here), turns every recording into a per-block entropy feature vector, and then
repeats a train/test protocol: fit vote weights on an inner split of the
training fold, discretize the redistributed band weights into replication
levels, and compare classifiers on the original versus the augmented feature
matrix. Everything is deterministic in the experiment seed.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .augment import WeightLevels, augment_indices, discretize, write_augmentation_json
from .classify import ConfusionMatrix, RunMetrics, evaluate, make_classifier
from .errors import InsufficientDataError, ParameterError, SingularMatrixError
from .les import FeatureVector, extract_features
from .signal_prep import Recording, bandpass_filter, compute_psd, split_blocks
from .synth import SynthSpec, generate_one
from .voting import (
    FeaturePartition,
    WeightVector,
    build_label_matrix,
    equal_band_ranges,
    fit_weights,
    partition_features,
    train_weak_classifiers,
)

VARIANT_ORIGINAL = "original"


@dataclass(frozen=True)
class PipelineParams:
    """Front half of the pipeline: band limits, spectrum width, block width."""

    freq_start: float = 0.5
    freq_end: float = 50.0
    psd_cols: int = 14200
    block_width: int = 100

    def __post_init__(self):
        if not 0.0 < self.freq_start < self.freq_end:
            raise ParameterError("need 0 < freq_start < freq_end")
        if self.psd_cols < 1 or self.block_width < 1:
            raise ParameterError("psd_cols and block_width must be >= 1")
        if self.psd_cols % self.block_width:
            raise ParameterError(
                f"psd_cols={self.psd_cols} not divisible by block_width={self.block_width}"
            )

    @property
    def n_blocks(self) -> int:
        return self.psd_cols // self.block_width


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment run."""

    synth: SynthSpec
    pipeline: PipelineParams = field(default_factory=PipelineParams)
    m: int = 8
    repetitions: int = 20
    train_per_class: int = 30
    test_per_class: int = 10
    methods: tuple[str, ...] = ("constrained", "unconstrained")
    classifiers: tuple[str, ...] = ("svm", "knn")
    base_classifier: str = "svm"
    inner_train_fraction: float = 0.8
    num_levels: int = 5
    knn_k: int = 5
    svm_c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ParameterError("repetitions must be >= 1")
        if self.train_per_class < 2 or self.test_per_class < 1:
            raise ParameterError("need at least 2 training and 1 test sample per class")
        if self.train_per_class + self.test_per_class > self.synth.samples_per_class:
            raise InsufficientDataError(
                f"train+test={self.train_per_class + self.test_per_class} per class "
                f"but only {self.synth.samples_per_class} samples per class exist"
            )
        if not 0.0 < self.inner_train_fraction < 1.0:
            raise ParameterError("inner_train_fraction must lie in (0, 1)")
        if not self.methods or not self.classifiers:
            raise ParameterError("need at least one method and one classifier")

    def classifier_spec(self, kind: str) -> dict:
        if kind == "knn":
            return {"kind": "knn", "k": self.knn_k}
        if kind == "svm":
            return {"kind": "svm", "c": self.svm_c}
        raise ParameterError(f"unknown classifier kind {kind!r}")

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["synth"] = self.synth.to_json_dict()
        return doc


def class_codes(n_classes: int) -> tuple[float, ...]:
    """Numeric label per class: +1/-1 for two classes, 0..k-1 otherwise."""
    if n_classes == 2:
        return (1.0, -1.0)
    return tuple(float(i) for i in range(n_classes))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (samples x features) with class codes and names."""

    x: np.ndarray
    y: np.ndarray
    codes: tuple[float, ...]
    class_names: tuple[str, ...]
    block_ranges: tuple[tuple[float, float], ...]


def extract_recording_features(rec: Recording, pipeline: PipelineParams) -> FeatureVector:
    """Filter, estimate the spectrum matrix, block it, and compute entropies."""
    filtered = bandpass_filter(rec, pipeline.freq_start, pipeline.freq_end)
    spectrum = compute_psd(filtered, pipeline.freq_start, pipeline.freq_end, pipeline.psd_cols)
    blocks, _ = split_blocks(spectrum, pipeline.block_width)
    return extract_features(blocks)


def _dataset_row(args):
    synth, pipeline, index = args
    rec = generate_one(synth, index)
    features = extract_recording_features(rec, pipeline)
    return features.values, rec.class_label, features.block_ranges


def build_dataset(config: ExperimentConfig, jobs: int = 1) -> Dataset:
    """Generate the synthetic corpus and extract one feature vector per recording.

    Recordings are produced one at a time (or per worker with ``jobs`` > 1), so
    only the feature vectors are ever held in memory together.
    """
    names = tuple(config.synth.class_labels())
    codes = class_codes(config.synth.n_classes)
    code_of = dict(zip(names, codes))
    total = config.synth.n_classes * config.synth.samples_per_class
    args = [(config.synth, config.pipeline, index) for index in range(total)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_dataset_row, args))
    else:
        results = [_dataset_row(a) for a in args]
    rows = [values for values, _, _ in results]
    labels = [code_of[label] for _, label, _ in results]
    return Dataset(
        x=np.vstack(rows),
        y=np.asarray(labels, dtype=float),
        codes=codes,
        class_names=names,
        block_ranges=results[0][2],
    )


@dataclass(frozen=True)
class RepetitionResult:
    rep: int
    weights: dict[str, WeightVector]
    levels: dict[str, WeightLevels]
    metrics: dict[str, RunMetrics]
    confusions: dict[str, ConfusionMatrix]


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    partition: FeaturePartition
    codes: tuple[float, ...]
    class_names: tuple[str, ...]
    repetitions: list[RepetitionResult]
    summary: dict[str, dict[str, float | None]]

    def result_keys(self) -> list[str]:
        variants = [VARIANT_ORIGINAL, *self.config.methods]
        return [f"{kind}:{variant}" for kind in self.config.classifiers for variant in variants]

    def mean_redistributed(self, method: str) -> np.ndarray:
        return np.mean([r.weights[method].redistributed for r in self.repetitions], axis=0)

    def mean_raw_weights(self, method: str) -> np.ndarray:
        return np.mean([r.weights[method].w for r in self.repetitions], axis=0)


def _split_per_class(y, codes, n_train, n_test, rng):
    train, test = [], []
    for code in codes:
        idx = np.flatnonzero(y == code)
        if idx.size < n_train + n_test:
            raise InsufficientDataError(
                f"class code {code} has {idx.size} samples, need {n_train + n_test}"
            )
        perm = rng.permutation(idx)
        train.append(perm[:n_train])
        test.append(perm[n_train : n_train + n_test])
    return np.concatenate(train), np.concatenate(test)


def _inner_split(y_train, codes, fraction, rng):
    fit_idx, holdout_idx = [], []
    for code in codes:
        idx = np.flatnonzero(y_train == code)
        n_fit = min(idx.size - 1, max(1, int(round(fraction * idx.size))))
        perm = rng.permutation(idx)
        fit_idx.append(perm[:n_fit])
        holdout_idx.append(perm[n_fit:])
    return np.concatenate(fit_idx), np.concatenate(holdout_idx)


def _run_repetition(rep, x, y, codes, config, partition, seed_seq) -> RepetitionResult:
    rng = np.random.default_rng(seed_seq)
    train_idx, test_idx = _split_per_class(
        y, codes, config.train_per_class, config.test_per_class, rng
    )
    x_train, y_train = x[train_idx], y[train_idx]
    x_test, y_test = x[test_idx], y[test_idx]

    fit_idx, holdout_idx = _inner_split(y_train, codes, config.inner_train_fraction, rng)
    weak = train_weak_classifiers(
        x_train[fit_idx], y_train[fit_idx], partition, config.classifier_spec(config.base_classifier)
    )
    l_matrix = build_label_matrix(weak, x_train[holdout_idx], partition)
    l_star = y_train[holdout_idx]

    weights, levels = {}, {}
    for method in config.methods:
        try:
            fitted = fit_weights(l_matrix, l_star, method, partition.band_ranges_hz)
        except SingularMatrixError:
            # Collinear label columns: fall back to the constrained fit, flagged.
            fitted = replace(
                fit_weights(l_matrix, l_star, "constrained", partition.band_ranges_hz),
                method=method,
                fallback=True,
            )
        weights[method] = fitted
        levels[method] = discretize(fitted.redistributed, config.num_levels)

    positive = codes[0] if len(codes) == 2 else None
    negative = codes[1] if len(codes) == 2 else None
    metrics, confusions = {}, {}
    for kind in config.classifiers:
        spec = config.classifier_spec(kind)
        columns = {VARIANT_ORIGINAL: None}
        for method in config.methods:
            columns[method] = augment_indices(partition, levels[method])[0]
        for variant, cols in columns.items():
            xt = x_train if cols is None else x_train[:, cols]
            xq = x_test if cols is None else x_test[:, cols]
            predictions = make_classifier(spec).fit(xt, y_train).predict(xq)
            run, confusion = evaluate(predictions, y_test, positive, negative, class_order=codes)
            metrics[f"{kind}:{variant}"] = run
            confusions[f"{kind}:{variant}"] = confusion
    return RepetitionResult(rep=rep, weights=weights, levels=levels, metrics=metrics,
                            confusions=confusions)


def _rep_star(args):
    return _run_repetition(*args)


def _summarize(repetitions, keys) -> dict:
    summary = {}
    for key in keys:
        accs = np.array([r.metrics[key].accuracy for r in repetitions])
        mean = float(accs.mean())
        deviations = accs - mean
        entry = {
            "accuracy_mean": mean,
            "accuracy_std": float(np.sqrt(np.mean(deviations**2))),
            "accuracy_mse": float(np.mean(deviations**2)),
        }
        sens = [r.metrics[key].sensitivity for r in repetitions]
        spec = [r.metrics[key].specificity for r in repetitions]
        entry["sensitivity_mean"] = float(np.mean(sens)) if None not in sens else None
        entry["specificity_mean"] = float(np.mean(spec)) if None not in spec else None
        summary[key] = entry
    return summary


def run_experiment(config: ExperimentConfig, jobs: int = 1,
                   dataset: Dataset | None = None) -> ExperimentResult:
    """Run all repetitions and aggregate accuracies per classifier and variant."""
    if dataset is None:
        dataset = build_dataset(config, jobs=jobs)
    bands = equal_band_ranges(config.pipeline.freq_start, config.pipeline.freq_end, config.m)
    partition = partition_features(dataset.x.shape[1], config.m, bands)
    seeds = np.random.SeedSequence(config.seed).spawn(config.repetitions)
    args = [
        (rep, dataset.x, dataset.y, dataset.codes, config, partition, seeds[rep])
        for rep in range(config.repetitions)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            repetitions = list(pool.map(_rep_star, args))
    else:
        repetitions = [_run_repetition(*a) for a in args]
    result = ExperimentResult(
        config=config,
        partition=partition,
        codes=dataset.codes,
        class_names=dataset.class_names,
        repetitions=repetitions,
        summary={},
    )
    return replace(result, summary=_summarize(repetitions, result.result_keys()))


# ---------------------------------------------------------------------------
# Reports


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_metrics_csv(result: ExperimentResult, path) -> None:
    """Per-repetition accuracies plus mean/std/mse rows, deterministic bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["classifier", "variant", "rep", "accuracy_pct",
                         "sensitivity_pct", "specificity_pct"])
        for key in result.result_keys():
            kind, variant = key.split(":")
            for rep in result.repetitions:
                run = rep.metrics[key]
                writer.writerow([kind, variant, rep.rep, _fmt(run.accuracy),
                                 _fmt(run.sensitivity), _fmt(run.specificity)])
            agg = result.summary[key]
            writer.writerow([kind, variant, "mean", _fmt(agg["accuracy_mean"]),
                             _fmt(agg["sensitivity_mean"]), _fmt(agg["specificity_mean"])])
            writer.writerow([kind, variant, "std", _fmt(agg["accuracy_std"]), "", ""])
            writer.writerow([kind, variant, "mse", _fmt(agg["accuracy_mse"]), "", ""])


def write_weights_csv(result: ExperimentResult, path) -> None:
    """Mean fitted and redistributed weights per band, one column pair per method."""
    methods = result.config.methods
    header = ["band", "freq_lo_hz", "freq_hi_hz"]
    for method in methods:
        header += [f"w_{method}_mean", f"W_{method}_mean"]
    raw = {m: result.mean_raw_weights(m) for m in methods}
    red = {m: result.mean_redistributed(m) for m in methods}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for band, (lo, hi) in enumerate(result.partition.band_ranges_hz):
            row = [band, _fmt(lo), _fmt(hi)]
            for method in methods:
                row += [_fmt(raw[method][band]), _fmt(red[method][band])]
            writer.writerow(row)


def write_confusion_csv(result: ExperimentResult, path) -> None:
    """Confusion counts summed over repetitions, with per-actual-class percentages."""
    name_of = dict(zip(result.codes, result.class_names))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["classifier", "variant", "predicted", "actual", "count",
                         "pct_of_actual"])
        for key in result.result_keys():
            kind, variant = key.split(":")
            total = sum(rep.confusions[key].counts for rep in result.repetitions)
            merged = ConfusionMatrix(result.codes, total)
            pct = merged.column_percentages()
            for i, pred_code in enumerate(result.codes):
                for j, act_code in enumerate(result.codes):
                    writer.writerow([kind, variant, name_of[pred_code], name_of[act_code],
                                     int(total[i, j]), _fmt(pct[i, j])])


def write_report(result: ExperimentResult, out_dir) -> dict:
    """Emit report.json, metrics.csv, weights.csv, confusion.csv and one
    augmentation profile per method; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.json",
        "metrics": out / "metrics.csv",
        "weights": out / "weights.csv",
        "confusion": out / "confusion.csv",
    }
    write_metrics_csv(result, paths["metrics"])
    write_weights_csv(result, paths["weights"])
    write_confusion_csv(result, paths["confusion"])
    for method in result.config.methods:
        levels = discretize(result.mean_redistributed(method), result.config.num_levels)
        paths[f"augmentation_{method}"] = out / f"augmentation_{method}.json"
        write_augmentation_json(levels, paths[f"augmentation_{method}"],
                                result.partition.band_ranges_hz)

    doc = {
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": result.config.to_json_dict(),
        "class_names": list(result.class_names),
        "class_codes": list(result.codes),
        "partition": {
            "m": result.partition.m,
            "ranges": [list(r) for r in result.partition.ranges],
            "band_ranges_hz": [list(b) for b in result.partition.band_ranges_hz],
        },
        "summary": result.summary,
        "repetitions": [
            {
                "rep": rep.rep,
                "weights": {m: wv.to_json_dict() for m, wv in rep.weights.items()},
                "levels": {m: lv.levels.tolist() for m, lv in rep.levels.items()},
                "metrics": {
                    key: {
                        "accuracy_pct": run.accuracy,
                        "sensitivity_pct": run.sensitivity,
                        "specificity_pct": run.specificity,
                    }
                    for key, run in rep.metrics.items()
                },
            }
            for rep in result.repetitions
        ],
    }
    with open(paths["report"], "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return paths


# ---------------------------------------------------------------------------
# Profiles


def tiny_profile(seed: int = 0) -> ExperimentConfig:
    """Small synthetic study: 2 classes, 8 channels, 8 wide blocks, runs in seconds.

    One band is boosted x3 for the second class, which lowers the in-band
    channel correlation and shows up in that band's block entropy. Blocks are
    kept wide (60 spectrum columns each) so the per-block covariance, and with
    it the entropy feature, is estimated tightly enough for the weak
    classifiers to separate informative from uninformative bands.
    """
    from .synth import BandBoost

    bands = equal_band_ranges(0.5, 50.0, 8)
    lo, hi = bands[5]
    synth = SynthSpec(
        n_classes=2,
        samples_per_class=40,
        channels=8,
        duration_s=120.0,
        sample_rate=250.0,
        common_fraction=0.6,
        boosts=(BandBoost(class_index=1, freq_lo=lo, freq_hi=hi, multiplier=3.0),),
        seed=seed,
    )
    return ExperimentConfig(
        synth=synth,
        pipeline=PipelineParams(psd_cols=480, block_width=60),
        train_per_class=30,
        test_per_class=10,
        seed=seed,
    )


def paper_profile(seed: int = 0, duration_s: float = 300.0) -> ExperimentConfig:
    """Full-size study: 3 classes of 40, 64 channels, 142 blocks of width 100.

    A duration of at least ~287 s keeps the native spectral resolution finer
    than the 14200 output columns; shorter durations fall back to interpolation
    and the study keeps its shape but loses discriminative power.
    """
    from .synth import BandBoost

    bands = equal_band_ranges(0.5, 50.0, 8)
    half = tuple(range(32))
    synth = SynthSpec(
        n_classes=3,
        samples_per_class=40,
        channels=64,
        duration_s=duration_s,
        sample_rate=1000.0,
        common_fraction=0.6,
        boosts=(
            BandBoost(class_index=1, freq_lo=bands[5][0], freq_hi=bands[5][1],
                      multiplier=3.0, channels=half),
            BandBoost(class_index=2, freq_lo=bands[1][0], freq_hi=bands[1][1],
                      multiplier=3.0, channels=half),
        ),
        seed=seed,
    )
    return ExperimentConfig(
        synth=synth,
        pipeline=PipelineParams(psd_cols=14200, block_width=100),
        train_per_class=30,
        test_per_class=10,
        seed=seed,
    )

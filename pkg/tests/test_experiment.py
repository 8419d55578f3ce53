"""Experiment orchestration: splits, determinism, aggregation, reports."""

import csv
import json

import numpy as np
import pytest

from bandvote.classify import ConfusionMatrix
from bandvote.errors import InsufficientDataError, ParameterError
from bandvote.experiment import (
    ExperimentConfig,
    PipelineParams,
    _inner_split,
    _split_per_class,
    build_dataset,
    class_codes,
    extract_recording_features,
    paper_profile,
    run_experiment,
    tiny_profile,
    write_metrics_csv,
    write_report,
)
from bandvote.synth import BandBoost, SynthSpec, generate_one
from bandvote.voting import equal_band_ranges

BANDS = equal_band_ranges(0.5, 50.0, 8)


def small_config(seed=0, **overrides):
    synth = SynthSpec(
        n_classes=2,
        samples_per_class=8,
        channels=4,
        duration_s=30.0,
        sample_rate=250.0,
        common_fraction=0.6,
        boosts=(BandBoost(1, BANDS[5][0], BANDS[5][1], 3.0),),
        seed=seed,
    )
    defaults = dict(
        synth=synth,
        pipeline=PipelineParams(psd_cols=240, block_width=30),
        repetitions=3,
        train_per_class=6,
        test_per_class=2,
        seed=seed,
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


@pytest.fixture(scope="module")
def small_result():
    return run_experiment(small_config())


# ---------------------------------------------------------------------------
# Config validation


def test_pipeline_params_reject_non_divisible_width():
    with pytest.raises(ParameterError):
        PipelineParams(psd_cols=100, block_width=30)


def test_pipeline_params_reject_bad_band():
    with pytest.raises(ParameterError):
        PipelineParams(freq_start=50.0, freq_end=0.5)


def test_config_rejects_oversized_split():
    with pytest.raises(InsufficientDataError):
        small_config(train_per_class=7, test_per_class=2)


def test_config_rejects_bad_inner_fraction():
    with pytest.raises(ParameterError):
        small_config(inner_train_fraction=1.0)


def test_class_codes_two_class_signed():
    assert class_codes(2) == (1.0, -1.0)


def test_class_codes_three_class_ordinal():
    assert class_codes(3) == (0.0, 1.0, 2.0)


# ---------------------------------------------------------------------------
# Splits


def test_split_per_class_disjoint_and_sized():
    y = np.repeat([1.0, -1.0], 10)
    rng = np.random.default_rng(0)
    train, test = _split_per_class(y, (1.0, -1.0), 6, 3, rng)
    assert train.size == 12 and test.size == 6
    assert not set(train) & set(test)
    for code in (1.0, -1.0):
        assert (y[train] == code).sum() == 6
        assert (y[test] == code).sum() == 3


def test_split_per_class_insufficient_raises():
    y = np.repeat([1.0, -1.0], 5)
    with pytest.raises(InsufficientDataError):
        _split_per_class(y, (1.0, -1.0), 4, 2, np.random.default_rng(0))


def test_inner_split_keeps_both_classes_and_holdout():
    y = np.repeat([1.0, -1.0], 10)
    fit_idx, holdout_idx = _inner_split(y, (1.0, -1.0), 0.8, np.random.default_rng(0))
    assert not set(fit_idx) & set(holdout_idx)
    assert fit_idx.size + holdout_idx.size == 20
    for code in (1.0, -1.0):
        assert (y[fit_idx] == code).sum() == 8
        assert (y[holdout_idx] == code).sum() == 2


# ---------------------------------------------------------------------------
# Dataset


def test_extract_recording_features_counts_blocks():
    rec = generate_one(small_config().synth, 0)
    features = extract_recording_features(rec, PipelineParams(psd_cols=240, block_width=30))
    assert len(features.values) == 8


def test_build_dataset_shape_and_labels():
    config = small_config()
    dataset = build_dataset(config)
    assert dataset.x.shape == (16, 8)
    assert dataset.codes == (1.0, -1.0)
    assert (dataset.y == 1.0).sum() == 8 and (dataset.y == -1.0).sum() == 8
    assert len(dataset.block_ranges) == 8


def test_build_dataset_parallel_matches_serial():
    config = small_config()
    serial = build_dataset(config, jobs=1)
    parallel = build_dataset(config, jobs=2)
    assert np.array_equal(serial.x, parallel.x)
    assert np.array_equal(serial.y, parallel.y)


# ---------------------------------------------------------------------------
# Experiment structure


def test_result_has_all_repetitions_and_keys(small_result):
    assert len(small_result.repetitions) == 3
    keys = small_result.result_keys()
    assert len(keys) == 6  # 2 classifiers x (original + 2 methods)
    for rep in small_result.repetitions:
        assert set(rep.metrics) == set(keys)
        assert set(rep.confusions) == set(keys)
        assert set(rep.weights) == {"constrained", "unconstrained"}


def test_confusion_totals_match_test_fold(small_result):
    for rep in small_result.repetitions:
        for confusion in rep.confusions.values():
            assert confusion.total == 4  # 2 classes x 2 test samples


def test_constrained_weights_live_on_simplex(small_result):
    for rep in small_result.repetitions:
        w = rep.weights["constrained"].w
        assert w.min() >= -1e-12
        assert abs(w.sum() - 1.0) < 1e-9


def test_redistributed_weights_conserve_mass(small_result):
    for rep in small_result.repetitions:
        for fitted in rep.weights.values():
            assert abs(fitted.redistributed.sum() - fitted.w.sum()) < 1e-9


def test_summary_matches_recomputed_mean(small_result):
    for key in small_result.result_keys():
        accs = np.array([r.metrics[key].accuracy for r in small_result.repetitions])
        agg = small_result.summary[key]
        assert agg["accuracy_mean"] == pytest.approx(accs.mean())
        assert agg["accuracy_std"] == pytest.approx(np.sqrt(np.mean((accs - accs.mean()) ** 2)))
        assert agg["accuracy_mse"] == pytest.approx(np.mean((accs - accs.mean()) ** 2))


def test_two_class_summary_has_sensitivity(small_result):
    for agg in small_result.summary.values():
        assert agg["sensitivity_mean"] is not None
        assert agg["specificity_mean"] is not None


def test_rerun_is_deterministic(small_result):
    again = run_experiment(small_config())
    for key in small_result.result_keys():
        for first, second in zip(small_result.repetitions, again.repetitions):
            assert first.metrics[key] == second.metrics[key]
    for first, second in zip(small_result.repetitions, again.repetitions):
        for method in ("constrained", "unconstrained"):
            assert np.array_equal(first.weights[method].w, second.weights[method].w)


def test_different_seed_changes_splits():
    a = run_experiment(small_config(seed=0))
    b = run_experiment(small_config(seed=1))
    same = all(
        np.array_equal(x.weights["constrained"].w, y.weights["constrained"].w)
        for x, y in zip(a.repetitions, b.repetitions)
    )
    assert not same


# ---------------------------------------------------------------------------
# Reports


def test_write_report_emits_all_files(small_result, tmp_path):
    paths = write_report(small_result, tmp_path)
    for path in paths.values():
        assert path.exists() and path.stat().st_size > 0
    doc = json.loads(paths["report"].read_text())
    assert "created_at" in doc
    assert set(doc["summary"]) == set(small_result.result_keys())
    assert len(doc["repetitions"]) == 3


def test_metrics_csv_layout(small_result, tmp_path):
    path = tmp_path / "metrics.csv"
    write_metrics_csv(small_result, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["classifier", "variant", "rep",
                       "accuracy_pct", "sensitivity_pct", "specificity_pct"]
    # per key: one row per repetition plus mean/std/mse
    assert len(rows) == 1 + 6 * (3 + 3)
    labels = [row[2] for row in rows[1:7]]
    assert labels == ["0", "1", "2", "mean", "std", "mse"]


def test_metrics_csv_bytes_are_reproducible(small_result, tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_metrics_csv(small_result, first)
    write_metrics_csv(run_experiment(small_config()), second)
    assert first.read_bytes() == second.read_bytes()


def test_weights_csv_one_row_per_band(small_result, tmp_path):
    paths = write_report(small_result, tmp_path)
    rows = list(csv.reader(paths["weights"].open()))
    assert len(rows) == 9
    assert float(rows[1][1]) == 0.5 and float(rows[8][2]) == 50.0


def test_confusion_csv_counts_sum_to_totals(small_result, tmp_path):
    paths = write_report(small_result, tmp_path)
    rows = list(csv.reader(paths["confusion"].open()))[1:]
    per_key = {}
    for row in rows:
        per_key.setdefault((row[0], row[1]), 0)
        per_key[(row[0], row[1])] += int(row[4])
    assert all(total == 4 * 3 for total in per_key.values())  # 4 per rep x 3 reps


# ---------------------------------------------------------------------------
# Profiles


def test_tiny_profile_shape():
    config = tiny_profile()
    assert config.synth.n_classes == 2
    assert config.pipeline.n_blocks == 8
    assert config.repetitions == 20
    assert config.m == 8


def test_paper_profile_shape():
    config = paper_profile()
    assert config.synth.n_classes == 3
    assert config.synth.channels == 64
    assert config.pipeline.psd_cols == 14200
    assert config.pipeline.block_width == 100
    assert config.pipeline.n_blocks == 142
    assert config.train_per_class == 30 and config.test_per_class == 10
    assert config.repetitions == 20

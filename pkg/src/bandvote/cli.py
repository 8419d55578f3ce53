"""Command-line interface.

Subcommands mirror the pipeline stages: ``synth`` writes recordings, ``extract``
turns recordings into feature CSVs, ``weights`` fits vote weights from a feature
manifest, ``classify`` scores a train/test pair, and ``experiment`` runs the
whole repeated protocol and writes the report files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .augment import augment_indices, discretize, write_augmentation_json
from .classify import evaluate, make_classifier
from .errors import BandvoteError
from .experiment import (
    ExperimentConfig,
    PipelineParams,
    build_dataset,
    class_codes,
    extract_recording_features,
    paper_profile,
    run_experiment,
    tiny_profile,
    write_report,
)
from .les import read_features_csv, read_feature_manifest, write_features_csv, write_feature_manifest
from .signal_prep import read_recording_binary, read_recording_csv, write_recording_csv
from .synth import SynthSpec, generate_iter, read_synth_spec, write_synth_spec
from .voting import (
    build_label_matrix,
    equal_band_ranges,
    fit_weights,
    partition_features,
    train_weak_classifiers,
    write_weights_json,
)

PROFILES = {"tiny": tiny_profile, "paper": paper_profile}


def _read_recording(path: Path):
    if path.suffix == ".csv":
        return read_recording_csv(path)
    return read_recording_binary(path)


def _load_feature_table(manifest_path: Path):
    """Feature matrix, numeric labels and class names from an extract manifest."""
    manifest = read_feature_manifest(manifest_path)
    root = manifest_path.parent
    rows, labels = [], []
    for entry in manifest["entries"]:
        rows.append(read_features_csv(root / entry["features"]).values)
        labels.append(entry["class_label"])
    names = tuple(sorted(set(labels)))
    codes = class_codes(len(names))
    code_of = dict(zip(names, codes))
    x = np.vstack(rows)
    y = np.asarray([code_of[label] for label in labels], dtype=float)
    return x, y, names, codes, manifest


def cmd_synth(args) -> int:
    spec = read_synth_spec(args.config)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, rec in enumerate(generate_iter(spec)):
        name = f"recording_{index:04d}.csv"
        write_recording_csv(rec, out / name)
        entries.append({"recording": name, "class_label": rec.class_label})
        if args.verbose:
            print(f"wrote {name} ({rec.class_label})", file=sys.stderr)
    with open(out / "manifest.json", "w") as fh:
        json.dump({"entries": entries}, fh, indent=2)
        fh.write("\n")
    write_synth_spec(spec, out / "synth_spec.json")
    print(f"synth: wrote {len(entries)} recordings to {out}")
    return 0


def cmd_extract(args) -> int:
    pipeline = PipelineParams(
        freq_start=args.freq_start,
        freq_end=args.freq_end,
        psd_cols=args.psd_cols,
        block_width=args.block_width,
    )
    with open(Path(args.recordings) / "manifest.json") as fh:
        manifest = json.load(fh)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for entry in manifest["entries"]:
        rec = _read_recording(Path(args.recordings) / entry["recording"])
        features = extract_recording_features(rec, pipeline)
        name = Path(entry["recording"]).stem + "_features.csv"
        write_features_csv(features, out / name)
        entries.append({"features": name, "class_label": entry["class_label"]})
        if args.verbose:
            print(f"extracted {name}", file=sys.stderr)
    write_feature_manifest(
        entries, out / "features_manifest.json",
        extra={"pipeline": {"freq_start": pipeline.freq_start, "freq_end": pipeline.freq_end,
                            "psd_cols": pipeline.psd_cols, "block_width": pipeline.block_width}},
    )
    print(f"extract: wrote {len(entries)} feature files to {out}")
    return 0


def cmd_weights(args) -> int:
    x, y, names, codes, _ = _load_feature_table(Path(args.features))
    bands = equal_band_ranges(args.freq_start, args.freq_end, args.m)
    partition = partition_features(x.shape[1], args.m, bands)
    rng = np.random.default_rng(args.seed)
    fit_idx, holdout_idx = [], []
    for code in codes:
        idx = rng.permutation(np.flatnonzero(y == code))
        n_fit = min(idx.size - 1, max(1, int(round(0.8 * idx.size))))
        fit_idx.append(idx[:n_fit])
        holdout_idx.append(idx[n_fit:])
    fit_idx, holdout_idx = np.concatenate(fit_idx), np.concatenate(holdout_idx)
    weak = train_weak_classifiers(x[fit_idx], y[fit_idx], partition, args.base_classifier)
    l_matrix = build_label_matrix(weak, x[holdout_idx], partition)
    weights = fit_weights(l_matrix, y[holdout_idx], args.method, partition.band_ranges_hz)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_weights_json(weights, out)
    levels = discretize(weights.redistributed, args.num_levels)
    write_augmentation_json(levels, out.with_name(out.stem + "_levels.json"),
                            partition.band_ranges_hz)
    print(f"weights: {args.method} fit over m={args.m} bands -> {out}")
    for band, (w_i, cap_w, level) in enumerate(zip(weights.w, weights.redistributed, levels.levels)):
        lo, hi = partition.band_ranges_hz[band]
        print(f"  band {band} [{lo:g}-{hi:g} Hz]: w={w_i:.4f} W={cap_w:.4f} level={level}")
    return 0


def cmd_classify(args) -> int:
    x_train, y_train, names, codes, _ = _load_feature_table(Path(args.train))
    x_test, y_test, _, _, _ = _load_feature_table(Path(args.test))
    cols = None
    if args.weights:
        from .voting import read_weights_json

        weights = read_weights_json(args.weights)
        bands = weights.band_ranges_hz
        partition = partition_features(x_train.shape[1], weights.m, bands)
        levels = discretize(weights.redistributed, args.num_levels)
        cols = augment_indices(partition, levels)[0]
        x_train, x_test = x_train[:, cols], x_test[:, cols]
    spec = {"kind": args.classifier, "k": args.k, "c": args.c}
    predictions = make_classifier(spec).fit(x_train, y_train).predict(x_test)
    positive = codes[0] if len(codes) == 2 else None
    negative = codes[1] if len(codes) == 2 else None
    metrics, confusion = evaluate(predictions, y_test, positive, negative, class_order=codes)
    print(f"classify: {args.classifier} accuracy {metrics.accuracy:.2f}%"
          + (f" (augmented to {x_train.shape[1]} features)" if cols is not None else ""))
    if metrics.sensitivity is not None:
        print(f"  sensitivity {metrics.sensitivity:.2f}%  specificity {metrics.specificity:.2f}%")
    for i, pred_name in enumerate(names):
        row = " ".join(f"{confusion.counts[i, j]:4d}" for j in range(len(names)))
        print(f"  predicted {pred_name}: {row}")
    return 0


def cmd_experiment(args) -> int:
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        config = ExperimentConfig(
            synth=SynthSpec.from_json_dict(doc["synth"]),
            pipeline=PipelineParams(**doc.get("pipeline", {})),
            **{k: tuple(v) if isinstance(v, list) else v
               for k, v in doc.items() if k not in ("synth", "pipeline")},
        )
    else:
        config = PROFILES[args.profile]()
    if args.seed is not None:
        config = replace(config, seed=args.seed, synth=replace(config.synth, seed=args.seed))
    if args.verbose:
        print(f"experiment: profile={args.profile or args.config} seed={config.seed} "
              f"reps={config.repetitions}", file=sys.stderr)
    result = run_experiment(config, jobs=args.jobs)
    paths = write_report(result, args.out)
    print(f"experiment: {config.repetitions} repetitions complete, report in {args.out}")
    for key in result.result_keys():
        agg = result.summary[key]
        print(f"  {key}: mean accuracy {agg['accuracy_mean']:.2f}% "
              f"(std {agg['accuracy_std']:.2f})")
    return 0


def cmd_report(args) -> int:
    with open(Path(args.report) / "report.json") as fh:
        doc = json.load(fh)
    print(f"report: created {doc['created_at']}, classes {doc['class_names']}")
    for key, agg in doc["summary"].items():
        print(f"  {key}: mean accuracy {agg['accuracy_mean']:.2f}% "
              f"(std {agg['accuracy_std']:.2f}, mse {agg['accuracy_mse']:.2f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandvote",
        description="Spectral band importance by entropy features and weight voting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic recordings from a spec")
    p.add_argument("--config", required=True, help="synth spec JSON")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract entropy features from recordings")
    p.add_argument("--recordings", required=True, help="directory with manifest.json")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--freq-start", type=float, default=0.5)
    p.add_argument("--freq-end", type=float, default=50.0)
    p.add_argument("--psd-cols", type=int, default=14200)
    p.add_argument("--block-width", type=int, default=100)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("weights", help="fit vote weights from extracted features")
    p.add_argument("--features", required=True, help="features_manifest.json path")
    p.add_argument("--method", choices=("constrained", "unconstrained"), default="constrained")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--freq-start", type=float, default=0.5)
    p.add_argument("--freq-end", type=float, default=50.0)
    p.add_argument("--base-classifier", choices=("svm", "knn"), default="svm")
    p.add_argument("--num-levels", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="weights JSON path")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("classify", help="train on one feature set, score another")
    p.add_argument("--train", required=True, help="training features_manifest.json")
    p.add_argument("--test", required=True, help="test features_manifest.json")
    p.add_argument("--classifier", choices=("svm", "knn"), default="svm")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--weights", help="weights JSON for feature augmentation")
    p.add_argument("--num-levels", type=int, default=5)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("experiment", help="run the repeated train/test study")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--profile", choices=tuple(PROFILES), default="tiny")
    group.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="summarize an existing report directory")
    p.add_argument("--report", required=True, help="directory containing report.json")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BandvoteError as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

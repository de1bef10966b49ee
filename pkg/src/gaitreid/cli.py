"""Command-line interface.

Subcommands: ingest, features, calibrate, train, tune, predict, evaluate,
reid, bench, synth. Exit codes: 0 success, 2 config error, 3 data error,
4 model-compatibility error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from . import landmarks as landmark_io
from .boosting import TrainParams, predict_proba, train
from .calibration import estimate_correction_factors, save_correction_table
from .errors import ConfigError, DataError, GaitReidError, ModelCompatibilityError
from .features import extract_dataset, read_feature_csv, write_feature_csv
from .metrics import benchmark_training, format_report, majority_vote
from .pipeline import (
    PipelineConfig,
    _load_model_artifacts,
    load_config,
    prepare_rows_for_model,
    run_evaluate,
    run_train,
    tune_hyperparameters,
)
from .synth import (
    SynthCameraSpec,
    generate_multicamera_dataset,
    generate_person_profile,
    write_truth_csv,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="pipeline config file (key = value text)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--deterministic", action="store_true", default=None,
                        help="force deterministic mode")
    parser.add_argument("--out", help="output directory")


def _resolve_config(args) -> PipelineConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = PipelineConfig()
    if args.seed is not None:
        config.seed = args.seed
        config.train_params = dataclasses.replace(config.train_params, seed=args.seed)
    if args.deterministic is not None:
        config.deterministic = args.deterministic
        config.train_params = dataclasses.replace(
            config.train_params, deterministic=args.deterministic
        )
    if args.out is not None:
        config.out_dir = args.out
    return config


def _out_path(config: PipelineConfig, name: str) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    return os.path.join(config.out_dir, name)


def _cmd_ingest(args) -> int:
    config = _resolve_config(args)
    dataset = landmark_io.parse_landmark_csv(args.input)
    validated, report = landmark_io.validate_dataset(dataset)
    out_csv = _out_path(config, "clean_landmarks.csv")
    landmark_io.write_landmark_csv(out_csv, validated)
    report_path = _out_path(config, "ingest_report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(f"total={report.total}\nkept={report.kept}\ndropped={report.dropped}\n")
        for reason, count in sorted(report.drop_reasons.items()):
            fh.write(f"reason.{reason}={count}\n")
    print(f"parsed {report.total} rows: kept {report.kept}, dropped {report.dropped}")
    print(f"wrote {out_csv}")
    return 0


def _cmd_features(args) -> int:
    config = _resolve_config(args)
    dataset = landmark_io.parse_landmark_csv(args.input)
    validated, _ = landmark_io.validate_dataset(dataset)
    alpha = args.alpha if args.alpha is not None else config.smoothing_alpha
    if alpha > 0.0:
        validated = landmark_io.smooth_dataset(validated, alpha)
    rows, dropped = extract_dataset(validated)
    out_csv = _out_path(config, "features.csv")
    write_feature_csv(out_csv, rows)
    print(f"extracted {len(rows)} feature rows ({sum(dropped.values())} degenerate dropped)")
    print(f"wrote {out_csv}")
    return 0


def _cmd_calibrate(args) -> int:
    config = _resolve_config(args)
    rows = read_feature_csv(args.input)
    reference = args.reference if args.reference is not None else config.reference_camera
    table = estimate_correction_factors(rows, reference)
    out = _out_path(config, "correction.txt")
    save_correction_table(out, table)
    for camera in sorted(table.factors):
        print(f"camera {camera}: {table.factors[camera]:.6f}")
    print(f"wrote {out}")
    return 0


def _cmd_train(args) -> int:
    config = _resolve_config(args)
    result = run_train(config)
    print(f"rows per split: {result['rows']}")
    print(f"wrote {result['model']}")
    return 0


def _cmd_tune(args) -> int:
    config = _resolve_config(args)
    csv_path = _out_path(config, "trials.csv")
    best, log = tune_hyperparameters(config, trials=args.trials, csv_path=csv_path)
    best_path = _out_path(config, "best_params.txt")
    with open(best_path, "w", encoding="utf-8") as fh:
        for field in dataclasses.fields(TrainParams):
            fh.write(f"{field.name}={getattr(best, field.name)!r}\n")
    print(f"best validation loss {min(e['validation_loss'] for e in log):.6f} "
          f"over {len(log)} trials")
    print(f"wrote {csv_path} and {best_path}")
    return 0


def _cmd_predict(args) -> int:
    config = _resolve_config(args)
    model, table = _load_model_artifacts(config, args.model)
    dataset = landmark_io.parse_landmark_csv(args.input)
    validated, _ = landmark_io.validate_dataset(dataset)
    if config.smoothing_alpha > 0.0:
        validated = landmark_io.smooth_dataset(validated, config.smoothing_alpha)
    rows, _ = extract_dataset(validated)
    matrix, _ = prepare_rows_for_model(model, table, rows)
    probs = predict_proba(model, matrix)
    out = _out_path(config, "predictions.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["VIDEO_ID", "CAMERA_ID", "FRAME_NO", "PREDICTED_PERSON"]
            + [f"P_{label}" for label in model.class_labels]
        )
        for row, p in zip(rows, probs):
            writer.writerow(
                [row.video_id, row.camera_id, row.frame_no,
                 model.class_labels[int(np.argmax(p))]]
                + [repr(float(v)) for v in p]
            )
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def _cmd_evaluate(args) -> int:
    config = _resolve_config(args)
    result = run_evaluate(config, args.model)
    print(format_report(result["report"]))
    print(f"wrote {result['paths']['report']}")
    return 0


def _cmd_reid(args) -> int:
    config = _resolve_config(args)
    model, table = _load_model_artifacts(config, args.model)
    dataset = landmark_io.parse_landmark_csv(args.input)
    validated, _ = landmark_io.validate_dataset(dataset)
    rows, _ = extract_dataset(validated)
    matrix, _ = prepare_rows_for_model(model, table, rows)
    probs = predict_proba(model, matrix)
    tracks: dict[tuple[int, int], list[int]] = {}
    for i, row in enumerate(rows):
        tracks.setdefault((row.video_id, row.camera_id), []).append(i)
    out = _out_path(config, "tracks.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["VIDEO_ID", "CAMERA_ID", "FRAMES", "PREDICTED_PERSON"])
        for (video, camera), indices in sorted(tracks.items()):
            voted = majority_vote(probs[indices], model.class_labels)
            writer.writerow([video, camera, len(indices), voted])
    print(f"wrote {out} ({len(tracks)} tracks)")
    return 0


def _cmd_bench(args) -> int:
    config = _resolve_config(args)
    rng = np.random.default_rng(config.seed)
    labels = rng.integers(0, args.classes, size=args.rows)
    features = rng.uniform(size=(args.rows, args.features)) + labels[:, None] * 0.05
    params = dataclasses.replace(
        config.train_params, num_iterations=args.iterations, seed=config.seed
    )
    out = _out_path(config, "bench.csv")
    report = benchmark_training(features, labels, params,
                                repetitions=args.repetitions, csv_path=out)
    print(f"median {report.median_seconds:.3f}s, peak {report.median_peak_mb:.1f} MB "
          f"over {args.repetitions} run(s)")
    print(f"wrote {out}")
    return 0


def _cmd_synth(args) -> int:
    config = _resolve_config(args)
    seed = args.seed if args.seed is not None else config.seed
    persons = [
        generate_person_profile(seed, person_id, args.spread, noise_sigma=args.sigma)
        for person_id in range(1, args.persons + 1)
    ]
    if args.scales:
        scales = [float(s) for s in args.scales.split(",")]
        if len(scales) != args.cameras:
            raise ConfigError(
                f"--scales needs {args.cameras} comma-separated values"
            )
    else:
        scales = [1.0 + 0.25 * i for i in range(args.cameras)]
    cameras = [
        SynthCameraSpec(camera_id=i + 1, scale=scales[i],
                        frame_count=args.frames, dropout=args.dropout)
        for i in range(args.cameras)
    ]
    dataset, truth = generate_multicamera_dataset(
        persons, cameras, seed, videos_per_pair=args.videos_per_pair
    )
    out_csv = _out_path(config, "landmarks.csv")
    truth_csv = _out_path(config, "truth.csv")
    landmark_io.write_landmark_csv(out_csv, dataset)
    write_truth_csv(truth_csv, truth)
    print(f"wrote {out_csv} ({len(dataset.rows)} frames) and {truth_csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitreid",
        description="Gait-based person re-identification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a landmark CSV")
    p.add_argument("--input", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("features", help="extract gait features from landmarks")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, default=None, help="smoothing blend weight")
    _add_common(p)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("calibrate", help="estimate camera correction factors")
    p.add_argument("--input", required=True, help="feature CSV with person ids")
    p.add_argument("--reference", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("train", help="run the full training pipeline")
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("tune", help="random-search hyperparameters")
    p.add_argument("--trials", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("predict", help="per-frame predictions for a landmark CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score the config's test split")
    p.add_argument("--model", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("reid", help="majority-vote identity per track")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_reid)

    p = sub.add_parser("bench", help="benchmark training time and memory")
    p.add_argument("--rows", type=int, default=9974)
    p.add_argument("--features", type=int, default=7)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--repetitions", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic landmark dataset")
    p.add_argument("--persons", type=int, default=4)
    p.add_argument("--cameras", type=int, default=4)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--videos-per-pair", type=int, default=1)
    p.add_argument("--scales", default=None, help="comma-separated per-camera scales")
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ModelCompatibilityError as exc:
        print(f"model compatibility error: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except GaitReidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end orchestration: config, video-level splits, train/evaluate/tune.

The pipeline wiring is: parse -> validate -> (smooth) -> extract ->
calibrate on the training split -> correct -> fit normalization on the
training split -> normalize -> train. Calibration and normalization
artifacts are persisted next to the model and reused verbatim at
evaluation and inference time, so nothing is ever refit on test data.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import landmarks as landmark_io
from .boosting import BoostedEnsemble, TrainParams, load_model, predict_proba, save_model, train
from .calibration import (
    CorrectionTable,
    apply_correction,
    estimate_correction_factors,
    load_correction_table,
    save_correction_table,
)
from .errors import (
    ConfigError,
    DataError,
    EmptyInputError,
    GaitReidError,
    ModelCompatibilityError,
)
from .features import (
    FEATURE_NAMES,
    NormalizationStats,
    extract_dataset,
    feature_matrix,
    feature_names,
    fit_normalization,
    load_normalization,
    normalize_features,
    save_normalization,
)
from .landmarks import GaitDataset
from .metrics import (
    classification_report,
    confusion_matrix,
    majority_vote,
    write_confusion_csv,
    write_report_csv,
)

_INT_PARAM_FIELDS = {
    "num_leaves", "subsample_freq", "min_child_samples", "num_iterations",
    "max_bins", "seed",
}
_BOOL_PARAM_FIELDS = {"goss_enabled", "efb_enabled", "deterministic"}


@dataclass
class SplitSpec:
    train_videos: list[int] | None = None
    validation_videos: list[int] | None = None
    test_videos: list[int] | None = None
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)

    @property
    def explicit(self) -> bool:
        return any(
            v is not None
            for v in (self.train_videos, self.validation_videos, self.test_videos)
        )


@dataclass
class PipelineConfig:
    input_csv: list[str] = field(default_factory=list)
    reference_camera: int = 1
    smoothing_alpha: float = 0.0
    normalize: bool = True
    dedupe_shr: bool = False
    out_dir: str = "."
    seed: int = 0
    deterministic: bool = True
    split: SplitSpec = field(default_factory=SplitSpec)
    train_params: TrainParams = field(default_factory=TrainParams)
    tune_space: dict = field(default_factory=dict)
    tune_trials: int = 20

    def validate(self) -> None:
        if not self.input_csv:
            raise ConfigError("config needs at least one input_csv entry")
        spec = self.split
        if spec.explicit:
            groups = {
                "train": set(spec.train_videos or ()),
                "validation": set(spec.validation_videos or ()),
                "test": set(spec.test_videos or ()),
            }
            names = list(groups)
            for i, a in enumerate(names):
                for b in names[i + 1:]:
                    overlap = groups[a] & groups[b]
                    if overlap:
                        raise ConfigError(
                            f"videos {sorted(overlap)} listed in both {a} and {b}"
                        )
        else:
            if len(spec.fractions) != 3 or any(f < 0 for f in spec.fractions):
                raise ConfigError("split fractions must be three non-negative numbers")
            if abs(sum(spec.fractions) - 1.0) > 1e-9:
                raise ConfigError(
                    f"split fractions must sum to 1, got {sum(spec.fractions)}"
                )


# ---------------------------------------------------------------------------
# config file parsing: flat TOML-style key/value text with [section] headers


def _parse_scalar(raw: str):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw == "true":
        return True
    if raw == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(part) for part in inner.split(",")]
    return _parse_scalar(raw)


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines grouped under [section] headers."""
    sections: dict[str, dict] = {"": {}}
    current = sections[""]
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            current = sections.setdefault(name, {})
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {line_no} is not 'key = value': {line!r}")
        key, _, raw = stripped.partition("=")
        if not raw.strip().startswith('"') and "#" in raw:
            raw = raw.split("#", 1)[0]
        current[key.strip()] = _parse_value(raw)
    return sections


def _params_from_mapping(mapping: dict, base: TrainParams | None = None) -> TrainParams:
    base = base or TrainParams()
    valid = {f.name for f in dataclasses.fields(TrainParams)}
    updates = {}
    for key, value in mapping.items():
        if key not in valid:
            raise ConfigError(f"unknown training parameter: {key}")
        if key in _INT_PARAM_FIELDS:
            value = int(value)
        elif key in _BOOL_PARAM_FIELDS:
            value = bool(value)
        else:
            value = float(value)
        updates[key] = value
    return dataclasses.replace(base, **updates)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        sections = parse_config_text(fh.read())
    top = sections.get("", {})
    config = PipelineConfig()

    raw_inputs = top.get("input_csv", [])
    if isinstance(raw_inputs, str):
        raw_inputs = [raw_inputs]
    config.input_csv = [str(p) for p in raw_inputs]
    config.reference_camera = int(top.get("reference_camera", config.reference_camera))
    config.smoothing_alpha = float(top.get("smoothing_alpha", config.smoothing_alpha))
    config.normalize = bool(top.get("normalize", config.normalize))
    config.dedupe_shr = bool(top.get("dedupe_shr", config.dedupe_shr))
    config.out_dir = str(top.get("out_dir", config.out_dir))
    config.seed = int(top.get("seed", config.seed))
    config.deterministic = bool(top.get("deterministic", config.deterministic))

    split = sections.get("split", {})
    spec = SplitSpec()
    if "train_videos" in split:
        spec.train_videos = [int(v) for v in split["train_videos"]]
    if "validation_videos" in split:
        spec.validation_videos = [int(v) for v in split["validation_videos"]]
    if "test_videos" in split:
        spec.test_videos = [int(v) for v in split["test_videos"]]
    if "fractions" in split:
        spec.fractions = tuple(float(f) for f in split["fractions"])
    config.split = spec

    train_section = dict(sections.get("train", {}))
    train_section.setdefault("seed", config.seed)
    config.train_params = _params_from_mapping(train_section)

    tune = dict(sections.get("tune", {}))
    config.tune_trials = int(tune.pop("trials", config.tune_trials))
    config.tune_space = tune
    config.validate()
    return config


# ---------------------------------------------------------------------------
# splitting


def split_dataset(dataset: GaitDataset, config: PipelineConfig):
    """Partition a dataset by video id into (train, validation, test)."""
    videos = sorted({video for video, _, _, _ in dataset.source_manifest})
    if not videos:
        raise EmptyInputError("dataset manifest is empty")
    spec = config.split

    if spec.explicit:
        assigned: dict[int, str] = {}
        for name, listed in (
            ("train", spec.train_videos or []),
            ("validation", spec.validation_videos or []),
            ("test", spec.test_videos or []),
        ):
            for video in listed:
                if video not in videos:
                    raise ConfigError(f"{name} split lists unknown video {video}")
                if video in assigned:
                    raise ConfigError(
                        f"video {video} listed in both {assigned[video]} and {name}"
                    )
                assigned[video] = name
        unassigned = [v for v in videos if v not in assigned]
        if unassigned:
            raise ConfigError(f"videos {unassigned} not assigned to any partition")
        membership = assigned
    else:
        rng = np.random.default_rng(config.seed)
        shuffled = [videos[i] for i in rng.permutation(len(videos))]
        n = len(videos)
        n_test = int(round(spec.fractions[2] * n))
        n_val = int(round(spec.fractions[1] * n))
        n_train = n - n_test - n_val
        membership = {}
        for video in shuffled[:n_train]:
            membership[video] = "train"
        for video in shuffled[n_train:n_train + n_val]:
            membership[video] = "validation"
        for video in shuffled[n_train + n_val:]:
            membership[video] = "test"

    buckets = {"train": [], "validation": [], "test": []}
    for row in dataset.rows:
        buckets[membership[row.video_id]].append(row)
    for name, rows in buckets.items():
        if not rows:
            raise ConfigError(f"{name} partition is empty")
    return tuple(
        GaitDataset(rows=buckets[name], source_manifest=landmark_io._build_manifest(buckets[name]))
        for name in ("train", "validation", "test")
    )


# ---------------------------------------------------------------------------
# shared stage plumbing


def _stage(name: str, fn, *args, **kwargs):
    """Run one stage; re-raise toolkit errors with the stage name attached."""
    try:
        return fn(*args, **kwargs)
    except GaitReidError as exc:
        raise type(exc)(f"[stage {name}] {exc}") from exc


def _ingest(config: PipelineConfig):
    all_rows = []
    for path in config.input_csv:
        dataset = _stage("landmark_io", landmark_io.parse_landmark_csv, path)
        all_rows.extend(dataset.rows)
    merged = GaitDataset(rows=all_rows, source_manifest=landmark_io._build_manifest(all_rows))
    validated, report = _stage("validate", landmark_io.validate_dataset, merged)
    if config.smoothing_alpha > 0.0:
        validated = _stage(
            "smooth", landmark_io.smooth_dataset, validated, config.smoothing_alpha
        )
    return validated, report


def _labels_of(rows):
    labels = []
    for row in rows:
        if row.person_id is None:
            raise DataError("training/evaluation rows must carry PERSON_ID")
        labels.append(row.person_id)
    return np.asarray(labels)


def _matrix_for_names(rows, names) -> np.ndarray:
    full = feature_matrix(rows)
    columns = []
    for name in names:
        if name not in FEATURE_NAMES:
            raise ModelCompatibilityError(f"model feature {name!r} is not produced by this pipeline")
        columns.append(FEATURE_NAMES.index(name))
    return full[:, columns]


def _prepare_training_data(config: PipelineConfig):
    """Ingest, split, calibrate, correct and normalize; returns all splits."""
    dataset, ingest_report = _ingest(config)
    train_ds, val_ds, test_ds = _stage("split", split_dataset, dataset, config)

    split_rows = {}
    drop_counts = {}
    for name, ds in (("train", train_ds), ("validation", val_ds), ("test", test_ds)):
        rows, dropped = _stage("gait_features", extract_dataset, ds)
        split_rows[name] = rows
        drop_counts[name] = dropped

    table = _stage(
        "camera_calibration",
        estimate_correction_factors,
        split_rows["train"],
        config.reference_camera,
    )
    for name in split_rows:
        split_rows[name] = _stage(
            "camera_calibration", apply_correction, split_rows[name], table
        )

    stats = None
    if config.normalize:
        stats = _stage("normalization", fit_normalization, split_rows["train"])
        for name in split_rows:
            split_rows[name] = normalize_features(split_rows[name], stats)

    names = feature_names(config.dedupe_shr)
    data = {
        name: (
            feature_matrix(rows, dedupe_shr=config.dedupe_shr),
            _labels_of(rows),
            rows,
        )
        for name, rows in split_rows.items()
    }
    return {
        "data": data,
        "feature_names": names,
        "correction": table,
        "normalization": stats,
        "ingest_report": ingest_report,
        "drop_counts": drop_counts,
    }


def _normalization_payload(stats: NormalizationStats | None, names):
    if stats is None:
        return None
    return {
        name: {
            "min": stats.minimums[stats.feature_names.index(name)],
            "max": stats.maximums[stats.feature_names.index(name)],
        }
        for name in names
    }


def _stats_from_payload(payload, names) -> NormalizationStats | None:
    if payload is None:
        return None
    return NormalizationStats(
        minimums=tuple(payload[name]["min"] for name in names),
        maximums=tuple(payload[name]["max"] for name in names),
        feature_names=tuple(names),
    )


# ---------------------------------------------------------------------------
# top-level runs


def run_train(config: PipelineConfig) -> dict:
    """Train a model from a config; writes the model bundle into out_dir."""
    config.validate()
    prep = _prepare_training_data(config)
    X_train, y_train, _ = prep["data"]["train"]
    X_val, y_val, _ = prep["data"]["validation"]

    model = _stage(
        "boost_core",
        train,
        X_train,
        y_train,
        config.train_params,
        feature_names=prep["feature_names"],
        eval_set=(X_val, y_val),
    )

    os.makedirs(config.out_dir, exist_ok=True)
    correction_path = os.path.join(config.out_dir, "correction.txt")
    normalization_path = os.path.join(config.out_dir, "normalization.txt")
    model_path = os.path.join(config.out_dir, "model.json")
    log_path = os.path.join(config.out_dir, "training_log.csv")

    save_correction_table(correction_path, prep["correction"])
    if prep["normalization"] is not None:
        save_normalization(normalization_path, prep["normalization"])
    model.normalization = _normalization_payload(
        prep["normalization"], prep["feature_names"]
    )
    model.correction_reference = "correction.txt"
    save_model(model_path, model)

    with open(log_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "train_loss", "validation_loss"])
        for entry in model.train_log:
            writer.writerow(
                [
                    entry["iteration"],
                    repr(entry["train_loss"]),
                    repr(entry.get("validation_loss", "")),
                ]
            )

    return {
        "model": model_path,
        "correction": correction_path,
        "normalization": normalization_path if prep["normalization"] is not None else None,
        "training_log": log_path,
        "rows": {name: len(prep["data"][name][1]) for name in prep["data"]},
        "ingest": prep["ingest_report"],
    }


def _load_model_artifacts(config: PipelineConfig, model_path):
    model = load_model(model_path)
    if model.correction_reference is None:
        raise ModelCompatibilityError("model lacks a correction-table reference")
    table_path = os.path.join(os.path.dirname(os.path.abspath(model_path)),
                              model.correction_reference)
    table = load_correction_table(table_path)
    return model, table


def prepare_rows_for_model(model: BoostedEnsemble, table: CorrectionTable, rows):
    """Correct + normalize feature rows with the model's stored artifacts."""
    corrected = apply_correction(rows, table)
    stats = _stats_from_payload(model.normalization, model.feature_names)
    if stats is not None:
        full_stats = NormalizationStats(
            minimums=tuple(
                stats.minimums[model.feature_names.index(n)] if n in model.feature_names else 0.0
                for n in FEATURE_NAMES
            ),
            maximums=tuple(
                stats.maximums[model.feature_names.index(n)] if n in model.feature_names else 1.0
                for n in FEATURE_NAMES
            ),
        )
        corrected = normalize_features(corrected, full_stats)
    return _matrix_for_names(corrected, model.feature_names), corrected


def run_evaluate(config: PipelineConfig, model_path) -> dict:
    """Score the config's test split with a persisted model bundle."""
    config.validate()
    model, table = _load_model_artifacts(config, model_path)

    dataset, _ = _ingest(config)
    _, _, test_ds = _stage("split", split_dataset, dataset, config)
    rows, _ = _stage("gait_features", extract_dataset, test_ds)
    if not rows:
        raise EmptyInputError("test split contains no usable rows")
    X, corrected_rows = _stage("apply_model", prepare_rows_for_model, model, table, rows)
    y_true = _labels_of(rows)

    probs = predict_proba(model, X)
    pred_idx = np.argmax(probs, axis=1)
    y_pred = [model.class_labels[i] for i in pred_idx]

    matrix = confusion_matrix(y_pred, list(y_true), labels=model.class_labels)
    report = classification_report(matrix)

    tracks: dict[tuple[int, int], list[int]] = {}
    for i, row in enumerate(corrected_rows):
        tracks.setdefault((row.video_id, row.camera_id), []).append(i)
    correct = 0
    track_rows = []
    for (video, camera), indices in sorted(tracks.items()):
        voted = majority_vote(probs[indices], model.class_labels)
        truth = rows[indices[0]].person_id
        correct += int(voted == truth)
        track_rows.append((video, camera, len(indices), voted, truth))
    report.track_accuracy = correct / len(tracks)

    os.makedirs(config.out_dir, exist_ok=True)
    report_path = os.path.join(config.out_dir, "report.csv")
    confusion_path = os.path.join(config.out_dir, "confusion.csv")
    summary_path = os.path.join(config.out_dir, "summary.json")
    write_report_csv(report_path, report)
    write_confusion_csv(confusion_path, matrix)
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "frame_accuracy": report.accuracy,
                "track_accuracy": report.track_accuracy,
                "rows": int(matrix.total),
                "tracks": len(tracks),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return {
        "report": report,
        "matrix": matrix,
        "tracks": track_rows,
        "paths": {
            "report": report_path,
            "confusion": confusion_path,
            "summary": summary_path,
        },
    }


# ---------------------------------------------------------------------------
# hyperparameter tuning: seeded random search


def _sample_space(space: dict, rng) -> dict:
    sampled = {}
    for key, value in space.items():
        if isinstance(value, (list, tuple)) and len(value) == 2:
            low, high = value
            if key in _INT_PARAM_FIELDS:
                sampled[key] = int(rng.integers(int(low), int(high) + 1))
            else:
                sampled[key] = float(rng.uniform(float(low), float(high)))
        elif isinstance(value, (list, tuple)):
            sampled[key] = value[int(rng.integers(0, len(value)))]
        else:
            sampled[key] = value
    return sampled


def tune_hyperparameters(config: PipelineConfig, search_space=None,
                         trials=None, csv_path=None):
    """Random search over TrainParams fields against validation log-loss.

    Each trial draws from an isolated RNG stream (seed, trial index).
    Returns (best TrainParams, trial log as a list of dicts).
    """
    config.validate()
    space = search_space if search_space is not None else config.tune_space
    trials = trials if trials is not None else config.tune_trials
    if trials < 1:
        raise ConfigError("tuning requires at least 1 trial")
    if not space:
        raise ConfigError("tuning search space is empty")
    bad = [k for k in space if k not in {f.name for f in dataclasses.fields(TrainParams)}]
    if bad:
        raise ConfigError(f"unknown search-space parameters: {bad}")

    prep = _prepare_training_data(config)
    X_train, y_train, _ = prep["data"]["train"]
    X_val, y_val, _ = prep["data"]["validation"]

    log = []
    best = None
    for trial in range(trials):
        rng = np.random.default_rng([config.seed, trial])
        sampled = _sample_space(space, rng)
        params = _params_from_mapping(sampled, base=config.train_params)
        model = train(
            X_train, y_train, params,
            feature_names=prep["feature_names"], eval_set=(X_val, y_val),
        )
        loss = model.train_log[-1]["validation_loss"] if model.train_log else math.inf
        entry = {"trial": trial, "validation_loss": loss, **sampled}
        log.append(entry)
        if best is None or loss < best[0]:
            best = (loss, params)

    if csv_path is not None:
        keys = ["trial", "validation_loss"] + sorted(space)
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(keys)
            for entry in log:
                writer.writerow([repr(entry.get(k, "")) for k in keys])
    return best[1], log

"""Per-frame gait feature vectors derived from landmark geometry.

Seven features per frame, all from single-frame spatial data (no temporal
features):

* height          distance ear -> heel (left side)
* hand            upper arm + forearm length (left side)
* leg             thigh + lower leg length (left side)
* step_length     |x difference| between the two heels
* foot_clearance  |x difference| between left heel and right foot index
* body_wideness   shoulder width / hip width
* shr             shoulder width / hip width (same formula, kept as a
                  separate column; pass dedupe_shr=True to feature_matrix
                  to drop the duplicate)

Lengths are dimensionless (normalized image coordinates). Ratio features
are invariant to uniform scaling; length features scale linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateFrameError, EmptyInputError
from .landmarks import GaitDataset, LandmarkFrame

FEATURE_NAMES = (
    "height",
    "hand",
    "leg",
    "step_length",
    "foot_clearance",
    "body_wideness",
    "shr",
)

LENGTH_FEATURES = ("height", "hand", "leg", "step_length", "foot_clearance")
RATIO_FEATURES = ("body_wideness", "shr")

FEATURE_CSV_COLUMNS = (
    "PERSON_ID",
    "CAMERA_ID",
    "VIDEO_ID",
    "FRAME_NO",
    "HEIGHT",
    "HAND",
    "LEG",
    "STEP_LENGTH",
    "FOOT_CLEARANCE",
    "BODY_WIDENESS",
    "SHR",
)


@dataclass
class GaitFeatureRow:
    person_id: int | None
    camera_id: int
    video_id: int
    frame_no: int
    height: float
    hand: float
    leg: float
    step_length: float
    foot_clearance: float
    body_wideness: float
    shr: float

    def values(self) -> tuple[float, ...]:
        return (
            self.height,
            self.hand,
            self.leg,
            self.step_length,
            self.foot_clearance,
            self.body_wideness,
            self.shr,
        )


def euclidean_distance(p1, p2) -> float:
    """Planar Euclidean distance between two (x, y) points."""
    x1, y1 = p1
    x2, y2 = p2
    if not all(math.isfinite(v) for v in (x1, y1, x2, y2)):
        raise ContractViolationError("euclidean_distance requires finite coordinates")
    return math.hypot(x2 - x1, y2 - y1)


def extract_features(frame: LandmarkFrame) -> GaitFeatureRow:
    """Compute the seven-feature gait vector for one complete frame.

    Raises DegenerateFrameError when hip width is zero (the shoulder/hip
    ratio is undefined) and ContractViolationError on incomplete frames.
    """
    if not frame.is_complete():
        raise ContractViolationError(
            f"incomplete frame (video {frame.video_id}, frame {frame.frame_no})"
        )
    pt = frame.point
    height = euclidean_distance(pt("LEFT_EAR"), pt("LEFT_HEEL"))
    upper_hand = euclidean_distance(pt("LEFT_SHOULDER"), pt("LEFT_ELBOW"))
    lower_hand = euclidean_distance(pt("LEFT_ELBOW"), pt("LEFT_WRIST"))
    hand = upper_hand + lower_hand
    thigh = euclidean_distance(pt("LEFT_HIP"), pt("LEFT_KNEE"))
    lower_leg = euclidean_distance(pt("LEFT_KNEE"), pt("LEFT_ANKLE"))
    leg = thigh + lower_leg
    # Step length and foot clearance use x coordinates only.
    step_length = abs(pt("LEFT_HEEL")[0] - pt("RIGHT_HEEL")[0])
    foot_clearance = abs(pt("LEFT_HEEL")[0] - pt("RIGHT_FOOT_INDEX")[0])
    hip_wideness = euclidean_distance(pt("LEFT_HIP"), pt("RIGHT_HIP"))
    shoulder_wideness = euclidean_distance(pt("LEFT_SHOULDER"), pt("RIGHT_SHOULDER"))
    if hip_wideness == 0.0:
        raise DegenerateFrameError(
            f"zero hip width (video {frame.video_id}, frame {frame.frame_no})"
        )
    ratio = shoulder_wideness / hip_wideness
    return GaitFeatureRow(
        person_id=frame.person_id,
        camera_id=frame.camera_id,
        video_id=frame.video_id,
        frame_no=frame.frame_no,
        height=height,
        hand=hand,
        leg=leg,
        step_length=step_length,
        foot_clearance=foot_clearance,
        body_wideness=ratio,
        shr=ratio,
    )


def extract_dataset(dataset: GaitDataset):
    """Extract features for every frame, dropping degenerate ones with a count.

    Returns (feature rows, drop counter keyed by reason).
    """
    from collections import Counter

    rows: list[GaitFeatureRow] = []
    dropped: Counter = Counter()
    for frame in dataset.rows:
        try:
            rows.append(extract_features(frame))
        except DegenerateFrameError as exc:
            dropped[str(exc)] += 1
    return rows, dropped


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature min/max observed on the fitting split. Immutable."""

    minimums: tuple[float, ...]
    maximums: tuple[float, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def degenerate_features(self) -> tuple[str, ...]:
        """Features whose fitted range collapsed to a single value."""
        return tuple(
            name
            for name, lo, hi in zip(self.feature_names, self.minimums, self.maximums)
            if lo == hi
        )


def fit_normalization(rows) -> NormalizationStats:
    """Record per-feature minimum and maximum over the fitting rows."""
    matrix = feature_matrix(rows)
    if matrix.shape[0] == 0:
        raise EmptyInputError("cannot fit normalization on an empty collection")
    return NormalizationStats(
        minimums=tuple(matrix.min(axis=0).tolist()),
        maximums=tuple(matrix.max(axis=0).tolist()),
        feature_names=FEATURE_NAMES,
    )


def normalize_features(rows, stats: NormalizationStats) -> list[GaitFeatureRow]:
    """Map each feature through (v - min) / (max - min); identifiers untouched.

    Constant features map to 0.0. Values outside the fitted range are passed
    through unclipped, so inference rows may land outside [0, 1].
    """
    out = []
    for row in rows:
        values = []
        for value, lo, hi in zip(row.values(), stats.minimums, stats.maximums):
            if hi > lo:
                values.append((value - lo) / (hi - lo))
            else:
                values.append(0.0)
        out.append(
            GaitFeatureRow(
                row.person_id, row.camera_id, row.video_id, row.frame_no, *values
            )
        )
    return out


def normalize_matrix(matrix: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    """Matrix form of normalize_features for already-stacked features."""
    lo = np.asarray(stats.minimums)
    hi = np.asarray(stats.maximums)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = (matrix - lo) / safe
    out[:, span == 0] = 0.0
    return out


def feature_matrix(rows, dedupe_shr: bool = False) -> np.ndarray:
    """Stack feature rows into an (n, 7) float64 matrix (or (n, 6) deduped)."""
    data = np.array([row.values() for row in rows], dtype=np.float64)
    if data.size == 0:
        data = data.reshape(0, len(FEATURE_NAMES))
    if dedupe_shr:
        data = data[:, : len(FEATURE_NAMES) - 1]
    return data


def feature_names(dedupe_shr: bool = False) -> tuple[str, ...]:
    return FEATURE_NAMES[:-1] if dedupe_shr else FEATURE_NAMES


def feature_correlation(rows) -> np.ndarray:
    """Pearson correlation matrix over the seven features.

    Constant features yield NaN rows/columns (undefined correlation); the
    diagonal is exactly 1 for non-constant features.
    """
    matrix = feature_matrix(rows)
    if matrix.shape[0] < 2:
        raise EmptyInputError("correlation requires at least 2 rows")
    centered = matrix - matrix.mean(axis=0)
    std = centered.std(axis=0)
    n_features = matrix.shape[1]
    corr = np.full((n_features, n_features), np.nan)
    for i in range(n_features):
        for j in range(n_features):
            if std[i] == 0.0 or std[j] == 0.0:
                continue
            if i == j:
                corr[i, j] = 1.0
            else:
                cov = float(np.mean(centered[:, i] * centered[:, j]))
                corr[i, j] = cov / (std[i] * std[j])
    return corr


def write_feature_csv(path, rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    "" if row.person_id is None else str(row.person_id),
                    str(row.camera_id),
                    str(row.video_id),
                    str(row.frame_no),
                ]
                + [repr(v) for v in row.values()]
            )


def read_feature_csv(path) -> list[GaitFeatureRow]:
    import csv

    from .errors import SchemaError

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyInputError(f"empty feature file: {path}") from None
        if header != list(FEATURE_CSV_COLUMNS):
            raise SchemaError(f"unexpected feature header: {header}")
        rows = []
        for cells in reader:
            if not cells:
                continue
            person = None if cells[0].strip() == "" else int(cells[0])
            rows.append(
                GaitFeatureRow(
                    person,
                    int(cells[1]),
                    int(cells[2]),
                    int(cells[3]),
                    *(float(c) for c in cells[4:11]),
                )
            )
    return rows


def save_normalization(path, stats: NormalizationStats) -> None:
    """Persist stats as `<feature>.min=<value>` / `<feature>.max=<value>` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for name, lo, hi in zip(stats.feature_names, stats.minimums, stats.maximums):
            fh.write(f"{name}.min={lo!r}\n")
            fh.write(f"{name}.max={hi!r}\n")


def load_normalization(path) -> NormalizationStats:
    values: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, raw = line.partition("=")
            values[key.strip()] = float(raw)
    names = tuple(sorted({k.rsplit(".", 1)[0] for k in values}, key=FEATURE_NAMES.index))
    return NormalizationStats(
        minimums=tuple(values[f"{n}.min"] for n in names),
        maximums=tuple(values[f"{n}.max"] for n in names),
        feature_names=names,
    )

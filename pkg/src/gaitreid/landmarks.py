"""Parse, validate, smooth and re-serialize per-frame skeletal landmark records.

A landmark CSV carries one body pose per row: identifier columns
(PERSON_ID, CAMERA_ID, VIDEO_ID, FRAME_NO) followed by 24 coordinate
columns, one X and one Y per landmark in CANONICAL_LANDMARKS. Coordinates
are normalized image coordinates (dimensionless, nominally in [0, 1] with
slack for out-of-frame detections). PERSON_ID may be empty at inference.

Frames with missing or non-finite coordinates are kept by the parser
(coordinates become NaN) and rejected later by ``validate_frame`` so that
an ingestion report can account for every row.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import (
    ContractViolationError,
    EmptyInputError,
    ParseError,
    SchemaError,
)

# Union of the landmarks referenced by the distance formulas in features.py.
CANONICAL_LANDMARKS = (
    "LEFT_EAR",
    "LEFT_SHOULDER",
    "LEFT_ELBOW",
    "LEFT_WRIST",
    "LEFT_HIP",
    "LEFT_KNEE",
    "LEFT_ANKLE",
    "LEFT_HEEL",
    "RIGHT_SHOULDER",
    "RIGHT_HIP",
    "RIGHT_HEEL",
    "RIGHT_FOOT_INDEX",
)

ID_COLUMNS = ("PERSON_ID", "CAMERA_ID", "VIDEO_ID", "FRAME_NO")

COORDINATE_COLUMNS = tuple(
    f"{name}_{axis}" for name in CANONICAL_LANDMARKS for axis in ("X", "Y")
)

CSV_COLUMNS = ID_COLUMNS + COORDINATE_COLUMNS

SCHEMA_VERSION = 1


@dataclass
class LandmarkFrame:
    """One video frame's named 2-D skeletal keypoints plus identifiers."""

    person_id: int | None
    camera_id: int
    video_id: int
    frame_no: int
    landmarks: dict[str, tuple[float, float]]

    def point(self, name: str) -> tuple[float, float]:
        return self.landmarks[name]

    def is_complete(self) -> bool:
        """True iff every canonical landmark is present with finite coordinates."""
        for name in CANONICAL_LANDMARKS:
            pt = self.landmarks.get(name)
            if pt is None or not (math.isfinite(pt[0]) and math.isfinite(pt[1])):
                return False
        return True


@dataclass
class GaitDataset:
    """Ordered frame collection plus a per-video source manifest."""

    rows: list
    source_manifest: list[tuple[int, int, int | None, int]] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def __len__(self) -> int:
        return len(self.rows)

    def total_frames(self) -> int:
        return sum(count for _, _, _, count in self.source_manifest)


@dataclass
class ValidationVerdict:
    keep: bool
    reason: str | None = None


@dataclass
class IngestReport:
    """Bookkeeping for validate_dataset: kept + dropped = total parsed rows."""

    total: int
    kept: int
    dropped: int
    drop_reasons: Counter


def _build_manifest(rows) -> list[tuple[int, int, int | None, int]]:
    order: list[tuple[int, int, int | None]] = []
    counts: Counter = Counter()
    for r in rows:
        key = (r.video_id, r.camera_id, r.person_id)
        if key not in counts:
            order.append(key)
        counts[key] += 1
    return [(v, c, p, counts[(v, c, p)]) for (v, c, p) in order]


def _parse_cell(text: str, row_no: int, column: str) -> float:
    """Parse one coordinate cell. Empty means 'not detected' -> NaN."""
    text = text.strip()
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"non-numeric cell {text!r} at row {row_no}, column {column}",
            row=row_no,
            column=column,
        ) from None


def _parse_id(text: str, row_no: int, column: str, optional: bool = False) -> int | None:
    text = text.strip()
    if text == "":
        if optional:
            return None
        raise ParseError(
            f"empty identifier at row {row_no}, column {column}",
            row=row_no,
            column=column,
        )
    try:
        return int(text)
    except ValueError:
        raise ParseError(
            f"non-integer identifier {text!r} at row {row_no}, column {column}",
            row=row_no,
            column=column,
        ) from None


def parse_landmark_csv(path, columns=CSV_COLUMNS) -> GaitDataset:
    """Read a landmark CSV into a GaitDataset, preserving file order.

    Raises SchemaError when a required column is missing or an unknown
    column is present, ParseError on malformed cells, EmptyInputError on
    a file with no data rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"empty landmark file: {path}") from None

        header = [h.strip() for h in header]
        expected = set(columns)
        seen = set(header)
        for col in columns:
            if col not in seen:
                raise SchemaError(f"missing required column {col}")
        for col in header:
            if col not in expected:
                raise SchemaError(f"unknown column {col}")
        index = {col: header.index(col) for col in columns}

        rows: list[LandmarkFrame] = []
        for row_no, cells in enumerate(reader, start=2):
            if not cells or all(c.strip() == "" for c in cells):
                continue
            if len(cells) != len(header):
                raise ParseError(
                    f"row {row_no} has {len(cells)} cells, expected {len(header)}",
                    row=row_no,
                )
            person = _parse_id(cells[index["PERSON_ID"]], row_no, "PERSON_ID", optional=True)
            camera = _parse_id(cells[index["CAMERA_ID"]], row_no, "CAMERA_ID")
            video = _parse_id(cells[index["VIDEO_ID"]], row_no, "VIDEO_ID")
            frame_no = _parse_id(cells[index["FRAME_NO"]], row_no, "FRAME_NO")
            landmarks = {}
            for name in CANONICAL_LANDMARKS:
                x = _parse_cell(cells[index[f"{name}_X"]], row_no, f"{name}_X")
                y = _parse_cell(cells[index[f"{name}_Y"]], row_no, f"{name}_Y")
                landmarks[name] = (x, y)
            rows.append(LandmarkFrame(person, camera, video, frame_no, landmarks))

    if not rows:
        raise EmptyInputError(f"landmark file has a header but no rows: {path}")
    return GaitDataset(rows=rows, source_manifest=_build_manifest(rows))


def write_landmark_csv(path, dataset: GaitDataset) -> None:
    """Serialize a dataset back to the canonical CSV layout (round-trip stable)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for frame in dataset.rows:
            cells = [
                "" if frame.person_id is None else str(frame.person_id),
                str(frame.camera_id),
                str(frame.video_id),
                str(frame.frame_no),
            ]
            for name in CANONICAL_LANDMARKS:
                x, y = frame.landmarks.get(name, (math.nan, math.nan))
                cells.append(repr(x))
                cells.append(repr(y))
            writer.writerow(cells)


def validate_frame(frame: LandmarkFrame) -> ValidationVerdict:
    """Keep a frame iff every canonical landmark is present and finite."""
    for name in CANONICAL_LANDMARKS:
        pt = frame.landmarks.get(name)
        if pt is None:
            return ValidationVerdict(False, f"missing {name}")
        x, y = pt
        if not math.isfinite(x):
            return ValidationVerdict(False, f"non-finite {name}_X")
        if not math.isfinite(y):
            return ValidationVerdict(False, f"non-finite {name}_Y")
    return ValidationVerdict(True)


def validate_dataset(dataset: GaitDataset) -> tuple[GaitDataset, IngestReport]:
    """Split a parsed dataset into kept frames and an ingestion report."""
    kept: list[LandmarkFrame] = []
    reasons: Counter = Counter()
    for frame in dataset.rows:
        verdict = validate_frame(frame)
        if verdict.keep:
            kept.append(frame)
        else:
            reasons[verdict.reason] += 1
    report = IngestReport(
        total=len(dataset.rows),
        kept=len(kept),
        dropped=len(dataset.rows) - len(kept),
        drop_reasons=reasons,
    )
    return GaitDataset(rows=kept, source_manifest=_build_manifest(kept)), report


def smooth_landmarks(current: LandmarkFrame, previous: LandmarkFrame, alpha: float) -> LandmarkFrame:
    """Blend the current frame's landmarks with the previous frame's.

    Each output coordinate is alpha * previous + (1 - alpha) * current;
    identifiers are copied from the current frame. Both frames must be
    complete and belong to the same video.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ContractViolationError(f"alpha must be in [0, 1], got {alpha}")
    if current.video_id != previous.video_id:
        raise ContractViolationError(
            f"cannot smooth across videos ({previous.video_id} -> {current.video_id})"
        )
    if not (current.is_complete() and previous.is_complete()):
        raise ContractViolationError("smoothing requires complete frames")
    blended = {}
    for name in CANONICAL_LANDMARKS:
        cx, cy = current.landmarks[name]
        px, py = previous.landmarks[name]
        blended[name] = (alpha * px + (1.0 - alpha) * cx, alpha * py + (1.0 - alpha) * cy)
    return LandmarkFrame(
        person_id=current.person_id,
        camera_id=current.camera_id,
        video_id=current.video_id,
        frame_no=current.frame_no,
        landmarks=blended,
    )


def smooth_dataset(dataset: GaitDataset, alpha: float) -> GaitDataset:
    """Apply smoothing along each video's frame sequence. alpha = 0 is a no-op."""
    if alpha == 0.0:
        return dataset
    out: list[LandmarkFrame] = []
    previous_by_video: dict[int, LandmarkFrame] = {}
    for frame in dataset.rows:
        prev = previous_by_video.get(frame.video_id)
        if prev is None or not (frame.is_complete() and prev.is_complete()):
            out.append(frame)
        else:
            out.append(smooth_landmarks(frame, prev, alpha))
        previous_by_video[frame.video_id] = out[-1]
    return GaitDataset(rows=out, source_manifest=_build_manifest(out))

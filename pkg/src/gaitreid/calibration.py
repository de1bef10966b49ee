"""Cross-camera scale correction from shared-subject height statistics.

Non-overlapping cameras observe subjects at different distances, so the
same person measures taller in one camera than another. For each person P
and camera C the mean raw height H_PC is computed over that person's
frames; the per-person factor is H_PC / H_P1 against the reference camera,
and the per-camera factor is the unweighted mean of per-person factors.
Length features are divided by the factor, mapping every camera onto the
reference scale; ratio features are scale-invariant and left untouched.

Correction must be estimated on raw (pre-normalization) features.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CalibrationCoverageError,
    DegenerateCalibrationError,
    EmptyInputError,
    MissingFactorError,
)
from .features import GaitFeatureRow


@dataclass
class CorrectionTable:
    reference_camera: int
    factors: dict[int, float]
    per_person_factors: dict[tuple[int, int], float] = field(default_factory=dict)
    method: str = "mean"


def estimate_correction_factors(calib_rows, reference_camera: int) -> CorrectionTable:
    """Estimate one multiplicative scale factor per camera.

    Every person observed in a non-reference camera must also appear in
    the reference camera; the reference camera's factor is forced to 1.0.
    """
    if not calib_rows:
        raise EmptyInputError("no calibration rows")

    height_sum: dict[tuple[int, int], float] = {}
    height_count: dict[tuple[int, int], int] = {}
    cameras: list[int] = []
    for row in calib_rows:
        if row.person_id is None:
            raise CalibrationCoverageError("calibration rows must carry person ids")
        key = (row.person_id, row.camera_id)
        height_sum[key] = height_sum.get(key, 0.0) + row.height
        height_count[key] = height_count.get(key, 0) + 1
        if row.camera_id not in cameras:
            cameras.append(row.camera_id)

    if reference_camera not in cameras:
        raise CalibrationCoverageError(
            f"reference camera {reference_camera} absent from calibration rows"
        )

    mean_height = {key: height_sum[key] / height_count[key] for key in height_sum}
    for (person, camera), value in mean_height.items():
        if value == 0.0:
            raise DegenerateCalibrationError(
                f"zero mean height for person {person} in camera {camera}"
            )

    per_person: dict[tuple[int, int], float] = {}
    per_camera_members: dict[int, list[float]] = {c: [] for c in cameras}
    for (person, camera) in sorted(mean_height):
        ref_key = (person, reference_camera)
        if ref_key not in mean_height:
            raise CalibrationCoverageError(
                f"person {person} seen in camera {camera} but not in "
                f"reference camera {reference_camera}"
            )
        factor = mean_height[(person, camera)] / mean_height[ref_key]
        per_person[(person, camera)] = factor
        per_camera_members[camera].append(factor)

    factors = {
        camera: sum(members) / len(members)
        for camera, members in per_camera_members.items()
        if members
    }
    factors[reference_camera] = 1.0
    return CorrectionTable(
        reference_camera=reference_camera,
        factors=factors,
        per_person_factors=per_person,
        method="mean",
    )


def apply_correction(rows, table: CorrectionTable) -> list[GaitFeatureRow]:
    """Divide the five length features by the row's camera factor.

    Ratio features (body_wideness, shr) are unchanged bit-for-bit.
    """
    out = []
    for row in rows:
        try:
            factor = table.factors[row.camera_id]
        except KeyError:
            raise MissingFactorError(
                f"camera {row.camera_id} has no correction factor"
            ) from None
        out.append(
            GaitFeatureRow(
                person_id=row.person_id,
                camera_id=row.camera_id,
                video_id=row.video_id,
                frame_no=row.frame_no,
                height=row.height / factor,
                hand=row.hand / factor,
                leg=row.leg / factor,
                step_length=row.step_length / factor,
                foot_clearance=row.foot_clearance / factor,
                body_wideness=row.body_wideness,
                shr=row.shr,
            )
        )
    return out


def save_correction_table(path, table: CorrectionTable) -> None:
    """Persist as `reference=<id>` then `camera.<id>=<factor>` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"reference={table.reference_camera}\n")
        for camera in sorted(table.factors):
            fh.write(f"camera.{camera}={table.factors[camera]!r}\n")


def load_correction_table(path) -> CorrectionTable:
    reference = None
    factors: dict[int, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, raw = line.partition("=")
            key = key.strip()
            if key == "reference":
                reference = int(raw)
            elif key.startswith("camera."):
                factors[int(key.split(".", 1)[1])] = float(raw)
    if reference is None:
        raise DegenerateCalibrationError(f"correction table {path} lacks a reference line")
    return CorrectionTable(reference_camera=reference, factors=factors)

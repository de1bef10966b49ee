"""Parameterized multi-person, multi-camera synthetic landmark generation.

The generator exists to give the pipeline verifiable ground truth, not to
model human gait faithfully: limbs swing sinusoidally at a per-person
cadence, heel x-offsets move in antiphase, the left ear/heel pair is rigid
so the height feature is exactly constant on noiseless frames, and every
coordinate is multiplied by the camera's scale factor before additive
Gaussian noise. Person profiles are spaced by a configurable separation
knob: consecutive ids differ in base height (and limb proportions) by at
least `spread`, so large spreads guarantee separable classes while small
spreads make every profile converge to the same body.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .landmarks import GaitDataset, LandmarkFrame

_BASE_HEIGHT = 0.42
_GROUND_Y = 0.88
_CENTER_X = 0.5


@dataclass(frozen=True)
class PersonProfile:
    person_id: int
    base_height: float
    hand_ratio: float      # arm length relative to height
    leg_ratio: float       # leg length relative to height
    shoulder_ratio: float  # shoulder width relative to height
    hip_ratio: float       # hip width relative to height
    cadence: float         # radians per frame
    step_amplitude: float  # heel swing relative to height
    noise_sigma: float


@dataclass(frozen=True)
class SynthCameraSpec:
    camera_id: int
    scale: float = 1.0
    frame_count: int = 100
    dropout: float = 0.0


def generate_person_profile(seed: int, person_id: int, spread: float,
                            noise_sigma: float = 0.0) -> PersonProfile:
    """Deterministic profile; consecutive ids are separated by >= spread.

    Base height and the limb proportions accumulate a step of spread plus
    a seeded jitter in [0, spread/2] per id, so gaps never shrink below
    spread and all deltas vanish as spread -> 0.
    """
    if spread <= 0:
        raise ValueError("spread must be > 0")
    height = _BASE_HEIGHT
    hand = 0.44
    leg = 0.50
    shoulder = 0.24
    hip = 0.16
    for j in range(1, person_id + 1):
        rng_j = np.random.default_rng([seed, j])
        height += spread + rng_j.uniform(0.0, 0.5 * spread)
        hand += spread + rng_j.uniform(0.0, 0.5 * spread)
        leg += spread + rng_j.uniform(0.0, 0.5 * spread)
        shoulder += 0.2 * spread * rng_j.uniform(0.5, 1.0)
        hip += 0.1 * spread * rng_j.uniform(0.5, 1.0)
    # gait-style parameters also collapse to a shared baseline as spread -> 0
    rng = np.random.default_rng([seed, person_id, 7])
    return PersonProfile(
        person_id=person_id,
        base_height=height,
        hand_ratio=hand,
        leg_ratio=leg,
        shoulder_ratio=shoulder,
        hip_ratio=hip,
        cadence=2.0 * math.pi * (0.08 + 0.5 * spread * rng.uniform()),
        step_amplitude=0.12 + 0.3 * spread * rng.uniform(),
        noise_sigma=noise_sigma,
    )


def _skeleton(profile: PersonProfile, phase: float) -> dict[str, tuple[float, float]]:
    """Unscaled landmark positions for one gait phase (image y grows down)."""
    h = profile.base_height
    swing = math.sin(phase)
    heel_offset = profile.step_amplitude * h * swing

    # left ear and heel share the same x offset: rigid pair, constant height
    left_heel = (_CENTER_X - heel_offset, _GROUND_Y)
    left_ear = (_CENTER_X - heel_offset, _GROUND_Y - h)
    right_heel = (_CENTER_X + heel_offset, _GROUND_Y)
    right_foot_index = (_CENTER_X + heel_offset + 0.08 * h, _GROUND_Y)

    shoulder_y = _GROUND_Y - 0.86 * h
    hip_y = _GROUND_Y - 0.52 * h
    shoulder_w = profile.shoulder_ratio * h
    hip_w = profile.hip_ratio * h
    left_shoulder = (_CENTER_X - 0.5 * shoulder_w, shoulder_y)
    right_shoulder = (_CENTER_X + 0.5 * shoulder_w, shoulder_y)
    left_hip = (_CENTER_X - 0.5 * hip_w, hip_y)
    right_hip = (_CENTER_X + 0.5 * hip_w, hip_y)

    # arm: segment lengths are fixed by the profile; angles swing with phase
    upper_arm = 0.52 * profile.hand_ratio * h
    forearm = 0.48 * profile.hand_ratio * h
    arm_angle = 0.35 * math.sin(phase + math.pi)
    left_elbow = (
        left_shoulder[0] + upper_arm * math.sin(arm_angle),
        left_shoulder[1] + upper_arm * math.cos(arm_angle),
    )
    left_wrist = (
        left_elbow[0] + forearm * math.sin(1.4 * arm_angle),
        left_elbow[1] + forearm * math.cos(1.4 * arm_angle),
    )

    # leg: knee/ankle oscillate laterally at the cadence frequency
    thigh = 0.52 * profile.leg_ratio * h
    shank = 0.48 * profile.leg_ratio * h
    knee_sway = 0.05 * h * swing
    left_knee = (left_hip[0] + knee_sway, left_hip[1] + thigh)
    ankle_sway = 0.03 * h * math.sin(phase + 0.5 * math.pi)
    left_ankle = (left_knee[0] + ankle_sway, left_knee[1] + shank)

    return {
        "LEFT_EAR": left_ear,
        "LEFT_SHOULDER": left_shoulder,
        "LEFT_ELBOW": left_elbow,
        "LEFT_WRIST": left_wrist,
        "LEFT_HIP": left_hip,
        "LEFT_KNEE": left_knee,
        "LEFT_ANKLE": left_ankle,
        "LEFT_HEEL": left_heel,
        "RIGHT_SHOULDER": right_shoulder,
        "RIGHT_HIP": right_hip,
        "RIGHT_HEEL": right_heel,
        "RIGHT_FOOT_INDEX": right_foot_index,
    }


def render_walk_sequence(profile: PersonProfile, camera: SynthCameraSpec,
                         seed, video_id: int = 1) -> list[LandmarkFrame]:
    """Render one video's frames for a person in one camera.

    Coordinates are scaled by camera.scale, then perturbed with Gaussian
    noise of the profile's sigma; frames drop out independently at the
    camera's dropout probability. `seed` may be an int or a sequence used
    to derive the stream.
    """
    rng = np.random.default_rng(seed)
    frames: list[LandmarkFrame] = []
    for t in range(camera.frame_count):
        phase = profile.cadence * t
        skeleton = _skeleton(profile, phase)
        landmarks = {}
        for name, (x, y) in skeleton.items():
            sx = x * camera.scale
            sy = y * camera.scale
            if profile.noise_sigma > 0.0:
                sx += rng.normal(0.0, profile.noise_sigma)
                sy += rng.normal(0.0, profile.noise_sigma)
            landmarks[name] = (sx, sy)
        if camera.dropout > 0.0 and rng.random() < camera.dropout:
            continue
        frames.append(
            LandmarkFrame(
                person_id=profile.person_id,
                camera_id=camera.camera_id,
                video_id=video_id,
                frame_no=t,
                landmarks=landmarks,
            )
        )
    return frames


def generate_multicamera_dataset(persons, cameras, seed: int,
                                 videos_per_pair: int = 1):
    """Render every (person, camera) pair; returns (dataset, ground truth).

    With videos_per_pair > 1 each pair yields several videos (distinct
    video ids), which gives video-level splits something to hold out. RNG
    streams derive from (seed, person, camera, repeat) so any subset is
    reproducible in isolation.
    """
    from .landmarks import _build_manifest

    rows: list[LandmarkFrame] = []
    video_map = {}
    video_id = 0
    for profile in persons:
        for camera in cameras:
            for rep in range(videos_per_pair):
                video_id += 1
                frames = render_walk_sequence(
                    profile,
                    camera,
                    seed=[seed, profile.person_id, camera.camera_id, rep],
                    video_id=video_id,
                )
                rows.extend(frames)
                video_map[video_id] = (profile.person_id, camera.camera_id, rep)
    truth = {
        "camera_scales": {camera.camera_id: camera.scale for camera in cameras},
        "profiles": {profile.person_id: profile for profile in persons},
        "videos": video_map,
    }
    return GaitDataset(rows=rows, source_manifest=_build_manifest(rows)), truth


def write_truth_csv(path, truth: dict) -> None:
    """Flat sidecar: entity, id, field, value rows for scales and profiles."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ENTITY", "ID", "FIELD", "VALUE"])
        for camera_id in sorted(truth["camera_scales"]):
            writer.writerow(["camera", camera_id, "scale", repr(truth["camera_scales"][camera_id])])
        for person_id in sorted(truth["profiles"]):
            profile = truth["profiles"][person_id]
            for field_name in (
                "base_height", "hand_ratio", "leg_ratio", "shoulder_ratio",
                "hip_ratio", "cadence", "step_amplitude", "noise_sigma",
            ):
                writer.writerow(
                    ["person", person_id, field_name, repr(getattr(profile, field_name))]
                )
        for video_id in sorted(truth["videos"]):
            person_id, camera_id, rep = truth["videos"][video_id]
            writer.writerow(["video", video_id, "person_camera_rep",
                             f"{person_id}:{camera_id}:{rep}"])

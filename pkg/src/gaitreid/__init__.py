"""Gait-based person re-identification from skeletal landmarks.

The toolkit turns per-frame pose landmarks into normalized gait features,
standardizes scale across non-overlapping cameras with per-camera
correction factors, and classifies identity with a from-scratch
histogram gradient-boosted tree ensemble (leaf-wise growth, GOSS row
sampling, exclusive feature bundling).
"""

from . import boosting, calibration, features, landmarks, metrics, pipeline, synth
from .boosting import BoostedEnsemble, TrainParams, load_model, predict_proba, save_model, train
from .calibration import CorrectionTable, apply_correction, estimate_correction_factors
from .features import (
    FEATURE_NAMES,
    GaitFeatureRow,
    NormalizationStats,
    euclidean_distance,
    extract_features,
    feature_correlation,
    fit_normalization,
    normalize_features,
)
from .landmarks import (
    CANONICAL_LANDMARKS,
    GaitDataset,
    LandmarkFrame,
    parse_landmark_csv,
    smooth_landmarks,
    validate_frame,
)
from .metrics import (
    ConfusionMatrix,
    EvaluationReport,
    benchmark_training,
    classification_report,
    confusion_matrix,
    majority_vote,
)
from .pipeline import PipelineConfig, load_config, run_evaluate, run_train, split_dataset, tune_hyperparameters
from .synth import (
    PersonProfile,
    SynthCameraSpec,
    generate_multicamera_dataset,
    generate_person_profile,
    render_walk_sequence,
)

__version__ = "0.1.0"

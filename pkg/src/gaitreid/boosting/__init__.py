"""Histogram gradient-boosted trees with leaf-wise growth, GOSS and EFB."""

from .binning import BinSpec, bin_matrix, build_bins
from .bundling import BundlePlan, efb_bundle, singleton_plan
from .ensemble import (
    MODEL_FORMAT_VERSION,
    BoostedEnsemble,
    TrainParams,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_label,
    predict_proba,
    predict_raw,
    save_model,
    serialize_model,
    train,
)
from .histograms import FeatureHistogram, accumulate, build_histograms, subtract
from .objective import log_loss, softmax_gradients, softmax_probabilities
from .sampling import bagging_sample, goss_sample
from .splitting import NodeStats, SplitCandidate, find_best_split, scan_feature
from .tree import LEAF_REGULARIZATION, Tree, grow_tree_leafwise

__all__ = [
    "BinSpec",
    "BoostedEnsemble",
    "BundlePlan",
    "FeatureHistogram",
    "LEAF_REGULARIZATION",
    "MODEL_FORMAT_VERSION",
    "NodeStats",
    "SplitCandidate",
    "Tree",
    "TrainParams",
    "accumulate",
    "bagging_sample",
    "bin_matrix",
    "build_bins",
    "build_histograms",
    "efb_bundle",
    "find_best_split",
    "goss_sample",
    "grow_tree_leafwise",
    "load_model",
    "log_loss",
    "model_from_dict",
    "model_to_dict",
    "predict_label",
    "predict_proba",
    "predict_raw",
    "save_model",
    "scan_feature",
    "serialize_model",
    "singleton_plan",
    "softmax_gradients",
    "softmax_probabilities",
    "subtract",
    "train",
]

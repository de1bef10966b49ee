"""Multiclass boosted-tree training loop, inference, and model persistence.

One tree per class per iteration against softmax cross-entropy gradients.
Row sampling is GOSS when enabled (keeping all rows when top_rate >= 1
degenerates to no sampling and is canonicalized to goss_enabled=False),
otherwise plain bagging re-drawn every subsample_freq iterations. The
model file is a versioned JSON document rendered with sorted keys and
repr-precision floats, so identical training runs produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    ContractViolationError,
    DegenerateLabelError,
    ModelCompatibilityError,
)
from .binning import BinSpec, bin_matrix, build_bins
from .bundling import efb_bundle, singleton_plan
from .objective import log_loss, softmax_gradients, softmax_probabilities
from .sampling import bagging_sample, goss_sample
from .tree import Tree, grow_tree_leafwise

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainParams:
    num_leaves: int = 87
    learning_rate: float = 0.0883
    colsample_bytree: float = 0.8652
    subsample: float = 0.8389
    subsample_freq: int = 10
    min_child_samples: int = 18
    num_iterations: int = 100
    max_bins: int = 255
    goss_enabled: bool = False
    goss_top_rate: float = 1.0
    goss_other_rate: float = 0.0
    efb_enabled: bool = False
    efb_max_conflict: float = 0.0
    seed: int = 0
    deterministic: bool = True

    def validate(self) -> None:
        if self.num_leaves < 2:
            raise ContractViolationError("num_leaves must be >= 2")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ContractViolationError("learning_rate must be in (0, 1]")
        if not 0.0 < self.colsample_bytree <= 1.0:
            raise ContractViolationError("colsample_bytree must be in (0, 1]")
        if not 0.0 < self.subsample <= 1.0:
            raise ContractViolationError("subsample must be in (0, 1]")
        if self.subsample_freq < 1:
            raise ContractViolationError("subsample_freq must be >= 1")
        if self.min_child_samples < 1:
            raise ContractViolationError("min_child_samples must be >= 1")
        if self.num_iterations < 0:
            raise ContractViolationError("num_iterations must be >= 0")
        if not 2 <= self.max_bins <= 255:
            raise ContractViolationError("max_bins must be in [2, 255]")
        if self.goss_enabled:
            if not 0.0 < self.goss_top_rate <= 1.0:
                raise ContractViolationError("goss_top_rate must be in (0, 1]")
            if self.goss_other_rate < 0.0 or (
                self.goss_top_rate + self.goss_other_rate > 1.0 + 1e-12
            ):
                raise ContractViolationError(
                    "goss rates must satisfy top_rate + other_rate <= 1"
                )

    def canonical(self) -> "TrainParams":
        """GOSS with top_rate >= 1 keeps every row, i.e. sampling disabled."""
        if self.goss_enabled and self.goss_top_rate >= 1.0:
            return dataclasses.replace(self, goss_enabled=False)
        return self


@dataclass
class BoostedEnsemble:
    class_labels: list
    trees: list[list[Tree]]  # [iteration][class]
    learning_rate: float
    feature_names: list[str]
    bin_specs: list[BinSpec]
    params: TrainParams
    normalization: dict | None = None       # feature -> {"min": .., "max": ..}
    correction_reference: str | None = None
    format_version: int = MODEL_FORMAT_VERSION
    train_log: list[dict] = field(default_factory=list, repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    @property
    def n_iterations(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def train(features: np.ndarray, labels, params: TrainParams,
          feature_names=None, eval_set=None) -> BoostedEnsemble:
    """Fit a boosted multiclass ensemble.

    eval_set, when given, is an (X, y) pair scored after every iteration;
    its log-loss lands in the returned model's train_log alongside the
    training loss.
    """
    params.validate()
    params = params.canonical()

    X = np.ascontiguousarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ContractViolationError("training features must form a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ContractViolationError("training features contain non-finite values")
    y = np.asarray(labels)
    if len(y) != X.shape[0]:
        raise ContractViolationError("label count does not match row count")

    classes = np.unique(y)
    if len(classes) < 2:
        raise DegenerateLabelError(
            f"training requires at least 2 classes, got {len(classes)}"
        )
    y_idx = np.searchsorted(classes, y)
    n, d = X.shape
    k = len(classes)

    if feature_names is None:
        feature_names = [f"f{j}" for j in range(d)]
    feature_names = list(feature_names)
    if len(feature_names) != d:
        raise ContractViolationError("feature_names length does not match features")

    bin_specs = build_bins(X, params.max_bins)
    binned = bin_matrix(X, bin_specs)
    feature_n_bins = [spec.n_bins for spec in bin_specs]
    if params.efb_enabled:
        plan = efb_bundle(binned, params.efb_max_conflict, feature_n_bins)
    else:
        plan = singleton_plan(feature_n_bins)
    bundled = plan.transform(binned)

    if eval_set is not None:
        X_val = np.ascontiguousarray(eval_set[0], dtype=np.float64)
        y_val_idx = np.searchsorted(classes, np.asarray(eval_set[1]))
        val_logits = np.zeros((X_val.shape[0], k))
    else:
        X_val = None

    rng = np.random.default_rng(params.seed)
    logits = np.zeros((n, k))
    all_rows = np.arange(n, dtype=np.intp)
    bag = None
    trees: list[list[Tree]] = []
    train_log: list[dict] = []

    for iteration in range(params.num_iterations):
        grad, hess = softmax_gradients(logits, y_idx)

        if params.goss_enabled:
            magnitudes = np.sqrt(np.sum(grad * grad, axis=1))
            selected, weights = goss_sample(
                magnitudes, params.goss_top_rate, params.goss_other_rate, rng
            )
        elif params.subsample < 1.0:
            if bag is None or iteration % params.subsample_freq == 0:
                bag = bagging_sample(n, params.subsample, rng)
            selected, weights = bag
        else:
            selected, weights = all_rows, None

        iteration_trees = []
        for cls in range(k):
            g = np.zeros(n)
            h = np.zeros(n)
            if weights is None:
                g[selected] = grad[selected, cls]
                h[selected] = hess[selected, cls]
            else:
                g[selected] = grad[selected, cls] * weights
                h[selected] = hess[selected, cls] * weights
            tree = grow_tree_leafwise(
                binned, bundled, plan, bin_specs, selected, g, h, params, rng
            )
            iteration_trees.append(tree)
            logits[:, cls] += params.learning_rate * tree.predict_binned(binned)
            if X_val is not None:
                val_logits[:, cls] += params.learning_rate * tree.predict_raw(X_val)
        trees.append(iteration_trees)

        entry = {"iteration": iteration + 1, "train_loss": log_loss(logits, y_idx)}
        if X_val is not None:
            entry["validation_loss"] = log_loss(val_logits, y_val_idx)
        train_log.append(entry)

    return BoostedEnsemble(
        class_labels=[label.item() if hasattr(label, "item") else label for label in classes],
        trees=trees,
        learning_rate=params.learning_rate,
        feature_names=feature_names,
        bin_specs=bin_specs,
        params=params,
        train_log=train_log,
    )


def predict_raw(model: BoostedEnsemble, features: np.ndarray) -> np.ndarray:
    """Accumulated learning-rate-scaled tree outputs, shape (n, n_classes)."""
    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X.reshape(1, -1)
    if X.shape[1] != model.n_features:
        raise ContractViolationError(
            f"model expects {model.n_features} features, got {X.shape[1]}"
        )
    logits = np.zeros((X.shape[0], model.n_classes))
    for iteration_trees in model.trees:
        for cls, tree in enumerate(iteration_trees):
            logits[:, cls] += model.learning_rate * tree.predict_raw(X)
    return logits[0] if single else logits


def predict_proba(model: BoostedEnsemble, features: np.ndarray) -> np.ndarray:
    """Per-class probability distribution(s); rows sum to 1."""
    return softmax_probabilities(predict_raw(model, features))


def predict_label(model: BoostedEnsemble, features: np.ndarray):
    """Argmax class label(s) under predict_proba."""
    probs = predict_proba(model, features)
    if probs.ndim == 1:
        return model.class_labels[int(np.argmax(probs))]
    return [model.class_labels[int(i)] for i in np.argmax(probs, axis=1)]


def model_to_dict(model: BoostedEnsemble) -> dict:
    return {
        "format_version": model.format_version,
        "class_labels": list(model.class_labels),
        "feature_names": list(model.feature_names),
        "learning_rate": float(model.learning_rate),
        "params": dataclasses.asdict(model.params),
        "bins": [
            {"boundaries": [float(b) for b in spec.boundaries], "upper": spec.upper}
            for spec in model.bin_specs
        ],
        "trees": [[tree.to_dict() for tree in iteration] for iteration in model.trees],
        "normalization": model.normalization,
        "correction_reference": model.correction_reference,
    }


def model_from_dict(payload: dict) -> BoostedEnsemble:
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelCompatibilityError(f"unsupported model format version: {version}")
    params = TrainParams(**payload["params"])
    bin_specs = [
        BinSpec(boundaries=np.asarray(entry["boundaries"], dtype=np.float64),
                upper=float(entry["upper"]))
        for entry in payload["bins"]
    ]
    trees = [
        [Tree.from_dict(tree) for tree in iteration] for iteration in payload["trees"]
    ]
    return BoostedEnsemble(
        class_labels=payload["class_labels"],
        trees=trees,
        learning_rate=payload["learning_rate"],
        feature_names=payload["feature_names"],
        bin_specs=bin_specs,
        params=params,
        normalization=payload.get("normalization"),
        correction_reference=payload.get("correction_reference"),
        format_version=version,
    )


def serialize_model(model: BoostedEnsemble) -> str:
    """Deterministic JSON text: sorted keys, repr-precision floats."""
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))


def save_model(path, model: BoostedEnsemble) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(model))
        fh.write("\n")


def load_model(path) -> BoostedEnsemble:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))

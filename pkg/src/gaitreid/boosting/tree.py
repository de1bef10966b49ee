"""Leaf-wise (best-first) regression tree growth on binned features.

The frontier holds splittable leaves with their precomputed best split;
each step splits the frontier leaf with the highest gain (ties go to the
earliest-created leaf) until the leaf budget is reached or no candidate
has positive gain. Leaf output is the Newton step -G / (H + lambda); the
ensemble applies learning-rate shrinkage when accumulating.

Histograms are built for the smaller child and subtracted for the larger
one. Node gradient/hessian totals are always recomputed directly from the
node's rows so split gains do not depend on the subtraction path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolationError
from .binning import BinSpec
from .bundling import BundlePlan
from .histograms import FeatureHistogram, accumulate, subtract
from .splitting import NodeStats, SplitCandidate, scan_feature

LEAF_REGULARIZATION = 1e-3


@dataclass
class Tree:
    """Flat node arrays; feature == -1 marks a leaf."""

    features: list[int] = field(default_factory=list)
    bin_indices: list[int] = field(default_factory=list)
    thresholds: list[float] = field(default_factory=list)
    lefts: list[int] = field(default_factory=list)
    rights: list[int] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    split_order: list[int] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.features)

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.features if f < 0)

    def _new_leaf(self) -> int:
        self.features.append(-1)
        self.bin_indices.append(-1)
        self.thresholds.append(0.0)
        self.lefts.append(-1)
        self.rights.append(-1)
        self.values.append(0.0)
        return len(self.features) - 1

    def predict_binned(self, binned: np.ndarray) -> np.ndarray:
        """Leaf outputs for pre-binned rows (training-time routing)."""
        return self._route(binned, self.bin_indices)

    def predict_raw(self, features: np.ndarray) -> np.ndarray:
        """Leaf outputs for raw feature rows via real-valued thresholds."""
        return self._route(features, self.thresholds)

    def _route(self, matrix: np.ndarray, cutoffs) -> np.ndarray:
        out = np.empty(matrix.shape[0], dtype=np.float64)
        stack = [(0, np.arange(matrix.shape[0], dtype=np.intp))]
        while stack:
            node, idx = stack.pop()
            feature = self.features[node]
            if feature < 0:
                out[idx] = self.values[node]
                continue
            go_left = matrix[idx, feature] <= cutoffs[node]
            stack.append((self.lefts[node], idx[go_left]))
            stack.append((self.rights[node], idx[~go_left]))
        return out

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "bin_indices": list(self.bin_indices),
            "thresholds": [float(t) for t in self.thresholds],
            "lefts": list(self.lefts),
            "rights": list(self.rights),
            "values": [float(v) for v in self.values],
            "split_order": list(self.split_order),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Tree":
        return cls(
            features=list(payload["features"]),
            bin_indices=list(payload["bin_indices"]),
            thresholds=list(payload["thresholds"]),
            lefts=list(payload["lefts"]),
            rights=list(payload["rights"]),
            values=list(payload["values"]),
            split_order=list(payload.get("split_order", [])),
        )


@dataclass
class _LeafState:
    node_id: int
    creation: int
    rows: np.ndarray
    stats: NodeStats
    hists: dict[int, FeatureHistogram]
    candidate: SplitCandidate | None


def _node_stats(rows: np.ndarray, gradients: np.ndarray, hessians: np.ndarray) -> NodeStats:
    return NodeStats(
        grad_total=float(np.sum(gradients[rows])),
        hess_total=float(np.sum(hessians[rows])),
        count=int(len(rows)),
    )


def _build_bundle_hists(bundles, bundled, rows, gradients, hessians, plan) -> dict[int, FeatureHistogram]:
    return {
        b: accumulate(bundled[:, b], rows, gradients, hessians, plan.n_bins[b])
        for b in bundles
    }


def _best_candidate(hists, stats, active_features, plan: BundlePlan,
                    bin_specs: list[BinSpec], min_child_samples: int):
    best = None
    for feature in active_features:
        m = plan.feature_n_bins[feature]
        if m < 2:
            continue
        bundle = plan.feature_bundle[feature]
        offset = plan.feature_offset[feature]
        hist = hists[bundle]
        lo, hi = offset + 1, offset + m
        result = scan_feature(
            hist.grad_sums[lo:hi], hist.hess_sums[lo:hi], hist.counts[lo:hi],
            stats, min_child_samples,
        )
        if result is None:
            continue
        t, gain, n_left, n_right, gl, gr, hl, hr = result
        if best is None or gain > best.gain:
            best = SplitCandidate(
                feature=feature,
                bin_index=t,
                threshold=bin_specs[feature].threshold_value(t),
                gain=gain,
                n_left=n_left,
                n_right=n_right,
                grad_left=gl,
                grad_right=gr,
                hess_left=hl,
                hess_right=hr,
            )
    return best


def grow_tree_leafwise(binned: np.ndarray, bundled: np.ndarray, plan: BundlePlan,
                       bin_specs: list[BinSpec], rows: np.ndarray,
                       gradients: np.ndarray, hessians: np.ndarray,
                       params, rng) -> Tree:
    """Grow one tree on the selected rows.

    gradients/hessians are full-length (indexed by row id) with sampling
    weights already folded in. The feature subset for the tree is drawn
    once from rng when colsample_bytree < 1.
    """
    if len(rows) == 0:
        raise ContractViolationError("cannot grow a tree on an empty working set")

    n_features = binned.shape[1]
    if params.colsample_bytree < 1.0:
        size = max(1, int(math.floor(params.colsample_bytree * n_features)))
        active = np.sort(rng.choice(n_features, size=size, replace=False))
    else:
        active = np.arange(n_features)
    active = [int(f) for f in active]
    bundles = sorted({plan.feature_bundle[f] for f in active})

    tree = Tree()
    root_id = tree._new_leaf()
    root_stats = _node_stats(rows, gradients, hessians)
    root_hists = _build_bundle_hists(bundles, bundled, rows, gradients, hessians, plan)
    frontier: list[_LeafState] = [
        _LeafState(
            node_id=root_id,
            creation=0,
            rows=rows,
            stats=root_stats,
            hists=root_hists,
            candidate=_best_candidate(
                root_hists, root_stats, active, plan, bin_specs,
                params.min_child_samples,
            ),
        )
    ]
    n_leaves = 1
    creations = 1

    while n_leaves < params.num_leaves:
        best_leaf = None
        for leaf in frontier:  # creation order: earliest wins ties
            if leaf.candidate is None:
                continue
            if best_leaf is None or leaf.candidate.gain > best_leaf.candidate.gain:
                best_leaf = leaf
        if best_leaf is None:
            break

        split = best_leaf.candidate
        go_left = binned[best_leaf.rows, split.feature] <= split.bin_index
        rows_left = best_leaf.rows[go_left]
        rows_right = best_leaf.rows[~go_left]

        left_stats = _node_stats(rows_left, gradients, hessians)
        right_stats = _node_stats(rows_right, gradients, hessians)
        if len(rows_left) <= len(rows_right):
            left_hists = _build_bundle_hists(bundles, bundled, rows_left, gradients, hessians, plan)
            right_hists = {b: subtract(best_leaf.hists[b], left_hists[b]) for b in bundles}
        else:
            right_hists = _build_bundle_hists(bundles, bundled, rows_right, gradients, hessians, plan)
            left_hists = {b: subtract(best_leaf.hists[b], right_hists[b]) for b in bundles}

        left_id = tree._new_leaf()
        right_id = tree._new_leaf()
        node = best_leaf.node_id
        tree.features[node] = split.feature
        tree.bin_indices[node] = split.bin_index
        tree.thresholds[node] = split.threshold
        tree.lefts[node] = left_id
        tree.rights[node] = right_id
        tree.split_order.append(node)

        frontier.remove(best_leaf)
        for node_id, child_rows, child_stats, child_hists in (
            (left_id, rows_left, left_stats, left_hists),
            (right_id, rows_right, right_stats, right_hists),
        ):
            frontier.append(
                _LeafState(
                    node_id=node_id,
                    creation=creations,
                    rows=child_rows,
                    stats=child_stats,
                    hists=child_hists,
                    candidate=_best_candidate(
                        child_hists, child_stats, active, plan, bin_specs,
                        params.min_child_samples,
                    ),
                )
            )
            creations += 1
        n_leaves += 1

    for leaf in frontier:
        tree.values[leaf.node_id] = -leaf.stats.grad_total / (
            leaf.stats.hess_total + LEAF_REGULARIZATION
        )
    return tree

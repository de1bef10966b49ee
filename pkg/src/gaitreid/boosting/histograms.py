"""Per-node histograms: binwise gradient/hessian sums and row counts.

Accumulation uses np.bincount, which walks rows in input order, so results
are reproducible regardless of thread count. Sibling histograms can be
derived by subtraction (parent - child) instead of a second pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FeatureHistogram:
    """Aggregates over one feature's bins for one tree node."""

    grad_sums: np.ndarray
    hess_sums: np.ndarray
    counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.counts)


def accumulate(codes: np.ndarray, rows: np.ndarray, gradients: np.ndarray,
               hessians: np.ndarray, n_bins: int) -> FeatureHistogram:
    """Histogram one bin-code column over the given rows.

    gradients/hessians are full-length arrays indexed by row id; any GOSS
    weights are already folded into them.
    """
    node_codes = codes[rows]
    return FeatureHistogram(
        grad_sums=np.bincount(node_codes, weights=gradients[rows], minlength=n_bins),
        hess_sums=np.bincount(node_codes, weights=hessians[rows], minlength=n_bins),
        counts=np.bincount(node_codes, minlength=n_bins).astype(np.int64),
    )


def subtract(parent: FeatureHistogram, child: FeatureHistogram) -> FeatureHistogram:
    """Sibling histogram as parent minus child."""
    return FeatureHistogram(
        grad_sums=parent.grad_sums - child.grad_sums,
        hess_sums=parent.hess_sums - child.hess_sums,
        counts=parent.counts - child.counts,
    )


def build_histograms(rows: np.ndarray, binned: np.ndarray, gradients: np.ndarray,
                     hessians: np.ndarray, n_bins_per_feature=None,
                     features=None) -> dict[int, FeatureHistogram]:
    """Histograms for each requested feature of one node (dict keyed by feature)."""
    binned = np.asarray(binned)
    if features is None:
        features = range(binned.shape[1])
    if n_bins_per_feature is None:
        n_bins_per_feature = [int(binned[:, f].max()) + 1 for f in range(binned.shape[1])]
    return {
        f: accumulate(binned[:, f], rows, gradients, hessians, n_bins_per_feature[f])
        for f in features
    }

"""Variance-gain split finding over binned histograms.

For a candidate threshold t on feature f the left child takes bins <= t.
Right-side aggregates are suffix sums over the nonzero bins accumulated
from the top bin downward; left-side aggregates are node totals minus the
suffix. The gain is

    gain(t) = (GL^2 / n_left + GR^2 / n_right - G^2 / n) / n

with GL/GR the (sample-weighted) gradient sums and integer row counts in
the denominators. Candidates violating min_child_samples are skipped; the
best candidate wins with ties broken by lower feature index, then lower
threshold index. A node with no strictly positive gain yields no split.

Because bin 0 is never read, the scan produces bit-identical gains whether
the per-feature bins come from a direct histogram or from an exclusive
feature bundle slice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binning import BinSpec
from .histograms import FeatureHistogram


@dataclass
class NodeStats:
    grad_total: float
    hess_total: float
    count: int


@dataclass
class SplitCandidate:
    feature: int
    bin_index: int
    threshold: float
    gain: float
    n_left: int
    n_right: int
    grad_left: float
    grad_right: float
    hess_left: float
    hess_right: float


def scan_feature(nz_grad: np.ndarray, nz_hess: np.ndarray, nz_counts: np.ndarray,
                 stats: NodeStats, min_child_samples: int):
    """Best threshold for one feature given its nonzero-bin aggregates.

    nz_* cover bins 1..m-1 (length m-1), so index t is the aggregate of
    bin t+1 and also the threshold candidate 'left = bins <= t'. Returns
    (t, gain, n_left, n_right, GL, GR, HL, HR) or None.
    """
    if len(nz_grad) == 0:
        return None
    # suffix sums accumulated from the top bin downward
    grad_right = np.cumsum(nz_grad[::-1])[::-1]
    hess_right = np.cumsum(nz_hess[::-1])[::-1]
    count_right = np.cumsum(nz_counts[::-1])[::-1]

    count_left = stats.count - count_right
    grad_left = stats.grad_total - grad_right
    hess_left = stats.hess_total - hess_right

    valid = (count_left >= min_child_samples) & (count_right >= min_child_samples)
    if not valid.any():
        return None

    parent_term = stats.grad_total * stats.grad_total / stats.count
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = (
            grad_left * grad_left / count_left
            + grad_right * grad_right / count_right
            - parent_term
        ) / stats.count
    gain = np.where(valid, gain, -np.inf)

    t = int(np.argmax(gain))  # first occurrence wins: lowest threshold index
    if not gain[t] > 0.0:
        return None
    return (
        t,
        float(gain[t]),
        int(count_left[t]),
        int(count_right[t]),
        float(grad_left[t]),
        float(grad_right[t]),
        float(hess_left[t]),
        float(hess_right[t]),
    )


def find_best_split(histograms: dict[int, FeatureHistogram], stats: NodeStats,
                    min_child_samples: int, bin_specs: list[BinSpec]):
    """Best split over per-feature histograms, or None when no gain > 0."""
    best = None
    for feature in sorted(histograms):
        hist = histograms[feature]
        if hist.n_bins < 2:
            continue
        result = scan_feature(
            hist.grad_sums[1:], hist.hess_sums[1:], hist.counts[1:],
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
